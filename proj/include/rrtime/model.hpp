// Domain types and pure likelihood/prior kernels for the hierarchical
// binomial-logit model of paired ALL/NAT event counts.
//
//   logit p[k,t,j] = beta_k0 + beta_k1 * x[k,t] + alpha[t] + delta[t] * 1{k=A} + gamma[j]
//   Z[k,t,j] ~ Binomial(n[t], p[k,t,j])
//   alpha[t] ~ N(0, tau2), delta[t] ~ N(0, sigma2), gamma[j] ~ N(0, omega2), sum(gamma) = 0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrtime {

inline constexpr std::size_t kMonths = 12;

enum class Scenario { All, Nat };

const char* to_string(Scenario k);

/// Raised when an input violates a documented structural invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Event counts Z[k,t,j] with per-year ensemble sizes n[t].
class CountPanel {
 public:
  CountPanel() = default;
  /// `counts_all` and `counts_nat` are row-major T x 12.
  CountPanel(std::vector<int> years, std::vector<int> counts_all, std::vector<int> counts_nat,
             std::vector<int> ensemble_sizes);

  std::size_t num_years() const { return years_.size(); }
  const std::vector<int>& years() const { return years_; }
  const std::vector<int>& ensemble_sizes() const { return ensemble_sizes_; }
  int ensemble_size(std::size_t t) const { return ensemble_sizes_.at(t); }
  int count(Scenario k, std::size_t t, std::size_t j) const;
  std::span<const int> counts(Scenario k) const;

  friend bool operator==(const CountPanel&, const CountPanel&) = default;

 private:
  std::vector<int> years_;
  std::vector<int> counts_all_;
  std::vector<int> counts_nat_;
  std::vector<int> ensemble_sizes_;
};

/// One covariate per scenario and year (intercept is implicit).
struct CovariateSeries {
  std::vector<double> x_all;
  std::vector<double> x_nat;
  bool standardized = false;

  std::size_t num_years() const { return x_all.size(); }
  const std::vector<double>& of(Scenario k) const { return k == Scenario::All ? x_all : x_nat; }

  /// Shift/scale each series to mean zero and unit sample variance (n - 1 denominator).
  static CovariateSeries standardize(std::span<const double> raw_all, std::span<const double> raw_nat);

  /// Throws ValidationError if lengths disagree or the `standardized` flag is not honoured.
  void validate(std::size_t expected_years) const;
};

struct Coefficients {
  double intercept = 0.0;
  double slope = 0.0;

  friend bool operator==(const Coefficients&, const Coefficients&) = default;
};

/// A complete parameter vector (alpha, delta, gamma, beta_A, beta_N, tau2, sigma2, omega2).
struct ParamState {
  std::vector<double> alpha;
  std::vector<double> delta;
  std::array<double, kMonths> gamma{};
  Coefficients beta_all;
  Coefficients beta_nat;
  double tau2 = 1.0;
  double sigma2 = 1.0;
  double omega2 = 1.0;

  static ParamState zeros(std::size_t num_years);

  std::size_t num_years() const { return alpha.size(); }
  const Coefficients& beta(Scenario k) const { return k == Scenario::All ? beta_all : beta_nat; }
  Coefficients& beta(Scenario k) { return k == Scenario::All ? beta_all : beta_nat; }

  friend bool operator==(const ParamState&, const ParamState&) = default;
};

/// Hyperparameters of the product prior, plus the optional +/-L bound on every monthly logit.
struct PriorConfig {
  double beta_sd = 10.0;
  double var_lower = 0.0;  // uniform support for tau2 and sigma2 is (var_lower, var_upper)
  double var_upper = 1000.0;
  double cauchy_scale = 10.0;
  std::optional<double> logit_bound;  // L; nullopt means inactive

  void validate() const;
};

double logit(double p);
double inv_logit(double x);
/// log(1 + exp(x)) without overflow.
double softplus(double x);

double log_choose(int n, int k);
double log_binomial_pmf(int z, int n, double logit_p);

double linear_predictor(const ParamState& state, const CovariateSeries& covs, Scenario k,
                        std::size_t t, std::size_t j);

/// Largest |logit p[k,t,j]| over all cells; used for the +/-L bound.
double max_abs_predictor(const ParamState& state, const CovariateSeries& covs);

double log_likelihood(const ParamState& state, const CountPanel& panel, const CovariateSeries& covs);

/// log of the prior; -infinity for any support or bound violation. `covs` is needed for the bound.
double log_prior(const ParamState& state, const PriorConfig& config, const CovariateSeries& covs);

/// Sum-zero constrained Normal log density of gamma (11 effective dimensions).
double log_gamma_density(std::span<const double, kMonths> gamma, double omega2);
double log_half_cauchy(double value, double scale);
double log_normal_density(double x, double mean, double variance);

/// Structural checks: sizes, positive variances, sum(gamma) == 0 within `gamma_tol`.
void check_state(const ParamState& state, std::size_t num_years, double gamma_tol = 1e-10);

}  // namespace rrtime
