// Componentwise interweaving MCMC for the binomial-logit mixed model.
//
// One iteration runs, in order:
//   1.    RWMH on each (alpha_t, delta_t) pair (bivariate, correlated proposal)
//   2.    RWMH on each gamma_j via a sum-zero re-centred proposal
//   3(A). RWMH on beta_A and on beta_N with year effects held fixed
//   3(S). Gibbs draws of beta_A, beta_N with eta/nu held fixed; alpha, delta back-solved
//   4(A). RWMH on tau2 then sigma2 with kappa = alpha/tau, xi = delta/sigma held fixed
//   4(S). RWMH on tau2 | alpha, then sigma2 | delta
//   5.    RWMH on omega2 | gamma
// Variance parameters are updated on the log scale (Jacobian included).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrtime/model.hpp"
#include "rrtime/rng.hpp"

namespace rrtime {

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How Step 3(S) draws the regression coefficients.
enum class BetaSufficientStep {
  /// Exact full conditionals given (eta, nu): beta_A | nu - alpha with variance sigma2,
  /// then beta_N | eta, nu, beta_A. Leaves the posterior invariant.
  ExactConditional,
  /// Treat eta and nu as independent: beta_A | nu (variance tau2 + sigma2),
  /// beta_N | eta (variance tau2).
  IndependentMarginal,
  /// Ablation: Step 3(S) is not run.
  Skip,
};

const char* to_string(BetaSufficientStep s);

/// Components held at their initial values (used for reduced-model checks).
struct FrozenComponents {
  bool year_effects = false;   // alpha, delta
  bool month_effects = false;  // gamma
  bool slopes = false;         // beta_A1, beta_N1
  bool variances = false;      // tau2, sigma2, omega2

  friend bool operator==(const FrozenComponents&, const FrozenComponents&) = default;
};

struct InitialStepSizes {
  double year_effects = 0.3;
  double month_effect = 0.3;
  double beta = 0.1;
  double log_variance = 0.5;

  friend bool operator==(const InitialStepSizes&, const InitialStepSizes&) = default;
};

struct SamplerConfig {
  int iterations = 10000;
  int burn_in = 0;
  int thin = 1;
  int tune_cycles = 6;
  std::vector<int> tune_iterations{400, 400, 400, 800, 800, 800};
  double target_accept_lower = 0.3;
  double target_accept_upper = 0.4;
  double prop_corr_alpha_delta = -0.98;
  double prop_corr_beta_all = 0.0;
  double prop_corr_beta_nat = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  BetaSufficientStep beta_sufficient_step = BetaSufficientStep::ExactConditional;
  FrozenComponents frozen;
  InitialStepSizes initial_steps;
  std::optional<ParamState> initial_state;

  void validate() const;
  /// Number of states kept: floor((iterations - burn_in) / thin) + 1.
  std::size_t retained_count() const;
  /// Whether the state after main-run iteration `i` (0 = start state) is kept.
  bool retains(int i) const;
};

/// Multiplicative step-size factor applied per out-of-band tuning cycle.
inline const double kTuneFactor = std::exp(0.3);

/// One tuning-cycle adjustment: up if rate > upper, down if rate < lower.
double adjust_step(double step_sd, double acceptance_rate, double lower, double upper);

struct PosteriorDraws {
  std::vector<ParamState> states;
  std::vector<std::string> block_names;
  std::vector<double> acceptance_rates;  // main run, per block
  std::vector<double> proposal_sds;      // final tuned, per block
  std::vector<std::vector<double>> tuning_acceptance;  // [cycle][block]
  std::vector<std::string> tuning_warnings;
  SamplerConfig config_echo;
  bool warm_started = true;
  std::size_t num_chains = 1;
};

/// Reparameterized year effects used by the interweaving steps.
struct AugmentedLatents {
  std::vector<double> eta;    // beta_N . x_N + alpha
  std::vector<double> nu;     // beta_A . x_A + alpha + delta
  std::vector<double> kappa;  // alpha / tau
  std::vector<double> xi;     // delta / sigma

  static AugmentedLatents from_state(const ParamState& state, const CovariateSeries& covs);
  /// Largest violation of the four defining identities against `state`.
  double reconstruction_error(const ParamState& state, const CovariateSeries& covs) const;
};

template <std::size_t N>
struct Proposal {
  static_assert(N == 1 || N == 2);
  std::array<double, 3> chol{};  // lower triangle (l11, l21, l22) of the covariance

  static Proposal make(double sd, double corr = 0.0) {
    if (!(sd >= 0.0) || !(std::abs(corr) < 1.0)) throw std::invalid_argument("bad proposal");
    Proposal p;
    p.chol = {sd, corr * sd, sd * std::sqrt(1.0 - corr * corr)};
    return p;
  }
};

template <std::size_t N>
struct MoveResult {
  std::array<double, N> value;
  double log_target;
  bool accepted;
};

/// Metropolis test for a symmetric proposal; non-finite proposals are rejected.
bool metropolis_accept(double log_target_current, double log_target_proposed, RandomStream& rng);

template <std::size_t N, class LogTarget>
MoveResult<N> rwmh_block(const std::array<double, N>& current, double current_log_target,
                         LogTarget&& log_target, const Proposal<N>& proposal, RandomStream& rng) {
  std::array<double, N> cand = current;
  const double z0 = rng.normal();
  cand[0] += proposal.chol[0] * z0;
  if constexpr (N == 2) {
    const double z1 = rng.normal();
    cand[1] += proposal.chol[1] * z0 + proposal.chol[2] * z1;
  }
  const double lt = log_target(cand);
  if (metropolis_accept(current_log_target, lt, rng)) return {cand, lt, true};
  return {current, current_log_target, false};
}

/// Adds `perturbation` to gamma[j] and subtracts the new mean from all components.
std::array<double, kMonths> recenter_with_perturbation(const std::array<double, kMonths>& gamma,
                                                       std::size_t j, double perturbation);
std::array<double, kMonths> propose_gamma(const std::array<double, kMonths>& gamma, std::size_t j,
                                          double step_sd, RandomStream& rng);

/// Analytic Normal posterior of (intercept, slope) for y_t ~ N(b0 + b1 x_t, variance),
/// b ~ N(0, prior_sd^2 I).
struct BetaPosterior {
  std::array<double, 2> mean;
  std::array<double, 3> cov;  // (c11, c12, c22)
};
BetaPosterior beta_posterior(std::span<const double> y, std::span<const double> x, double variance,
                             double prior_sd);
Coefficients gibbs_beta(std::span<const double> y, std::span<const double> x, double variance,
                        double prior_sd, RandomStream& rng);

struct TuneResult {
  std::vector<std::string> block_names;
  std::vector<double> proposal_sds;
  std::vector<std::vector<double>> cycle_acceptance;
  std::vector<std::string> warnings;
  ParamState state;  // warm start for the main run
};

/// Starting state used when the config does not provide one.
ParamState default_initial_state(const CountPanel& panel, const PriorConfig& prior);

TuneResult tune(const CountPanel& panel, const CovariateSeries& covs, const PriorConfig& prior,
                const SamplerConfig& config);

PosteriorDraws run_sampler(const CountPanel& panel, const CovariateSeries& covs,
                           const PriorConfig& prior, const SamplerConfig& config);

/// Runs `num_chains` chains concurrently (stream ids config.stream + c) and
/// concatenates their retained draws in chain order. Acceptance rates are averaged.
PosteriorDraws run_chains(const CountPanel& panel, const CovariateSeries& covs,
                          const PriorConfig& prior, const SamplerConfig& config,
                          std::size_t num_chains);

}  // namespace rrtime
