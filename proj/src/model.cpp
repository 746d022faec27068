#include "rrtime/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace rrtime {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

const char* to_string(Scenario k) { return k == Scenario::All ? "ALL" : "NAT"; }

CountPanel::CountPanel(std::vector<int> years, std::vector<int> counts_all,
                       std::vector<int> counts_nat, std::vector<int> ensemble_sizes)
    : years_(std::move(years)),
      counts_all_(std::move(counts_all)),
      counts_nat_(std::move(counts_nat)),
      ensemble_sizes_(std::move(ensemble_sizes)) {
  const std::size_t T = years_.size();
  if (T == 0) throw ValidationError("count panel needs at least one year");
  if (ensemble_sizes_.size() != T)
    throw ValidationError("ensemble size vector length does not match number of years");
  if (counts_all_.size() != T * kMonths || counts_nat_.size() != T * kMonths)
    throw ValidationError("count tensor must have 12 months for every year and scenario");
  for (std::size_t t = 0; t < T; ++t) {
    const int n = ensemble_sizes_[t];
    if (n < 1)
      throw ValidationError("ensemble size must be >= 1 (year " + std::to_string(years_[t]) + ")");
    for (std::size_t j = 0; j < kMonths; ++j) {
      for (const auto* counts : {&counts_all_, &counts_nat_}) {
        const int z = (*counts)[t * kMonths + j];
        if (z < 0 || z > n) {
          throw ValidationError("count " + std::to_string(z) + " outside [0, " + std::to_string(n) +
                                "] in year " + std::to_string(years_[t]) + ", month " +
                                std::to_string(j + 1));
        }
      }
    }
  }
}

int CountPanel::count(Scenario k, std::size_t t, std::size_t j) const {
  if (t >= num_years() || j >= kMonths) throw std::out_of_range("count panel index");
  return counts(k)[t * kMonths + j];
}

std::span<const int> CountPanel::counts(Scenario k) const {
  return k == Scenario::All ? std::span<const int>(counts_all_) : std::span<const int>(counts_nat_);
}

CovariateSeries CovariateSeries::standardize(std::span<const double> raw_all,
                                             std::span<const double> raw_nat) {
  if (raw_all.size() != raw_nat.size())
    throw ValidationError("ALL and NAT covariate series differ in length");
  if (raw_all.size() < 2) throw ValidationError("standardizing needs at least two years");
  auto scale = [](std::span<const double> raw) {
    const double n = static_cast<double>(raw.size());
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : raw) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) throw ValidationError("covariate series is constant; cannot standardize");
    std::vector<double> out(raw.size());
    std::transform(raw.begin(), raw.end(), out.begin(), [&](double v) { return (v - mean) / sd; });
    return out;
  };
  return CovariateSeries{scale(raw_all), scale(raw_nat), true};
}

void CovariateSeries::validate(std::size_t expected_years) const {
  if (x_all.size() != expected_years || x_nat.size() != expected_years) {
    throw ValidationError("covariate series length " + std::to_string(x_all.size()) + "/" +
                          std::to_string(x_nat.size()) + " does not match " +
                          std::to_string(expected_years) + " years");
  }
  for (const auto* xs : {&x_all, &x_nat})
    for (double v : *xs)
      if (!std::isfinite(v)) throw ValidationError("covariate contains a non-finite value");
  if (!standardized) return;
  for (const auto* xs : {&x_all, &x_nat}) {
    const double n = static_cast<double>(xs->size());
    const double mean = std::accumulate(xs->begin(), xs->end(), 0.0) / n;
    double ss = 0.0;
    for (double v : *xs) ss += (v - mean) * (v - mean);
    const double var = n > 1 ? ss / (n - 1.0) : 1.0;
    if (std::abs(mean) >= 1e-9 || std::abs(var - 1.0) >= 1e-6)
      throw ValidationError("covariate flagged standardized but mean/variance are off");
  }
}

ParamState ParamState::zeros(std::size_t num_years) {
  ParamState s;
  s.alpha.assign(num_years, 0.0);
  s.delta.assign(num_years, 0.0);
  return s;
}

void PriorConfig::validate() const {
  if (!(beta_sd > 0.0) || !(cauchy_scale > 0.0) || !(var_upper > 0.0))
    throw ValidationError("prior scale parameters must be strictly positive");
  if (!(var_lower >= 0.0) || !(var_lower < var_upper))
    throw ValidationError("variance prior support must satisfy 0 <= lower < upper");
  if (logit_bound && !(*logit_bound > 0.0))
    throw ValidationError("logit bound L must be positive");
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("logit: probability must lie in (0, 1)");
  return std::log(p / (1.0 - p));
}

double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double log_choose(int n, int k) {
  if (k < 0 || k > n) return kNegInf;
  return boost::math::lgamma(n + 1.0) - boost::math::lgamma(k + 1.0) -
         boost::math::lgamma(n - k + 1.0);
}

double log_binomial_pmf(int z, int n, double logit_p) {
  // z*log(p) + (n-z)*log(1-p) = z*x - n*log(1+e^x)
  return log_choose(n, z) + z * logit_p - n * softplus(logit_p);
}

double linear_predictor(const ParamState& state, const CovariateSeries& covs, Scenario k,
                        std::size_t t, std::size_t j) {
  if (t >= state.num_years() || t >= covs.num_years() || j >= kMonths)
    throw std::out_of_range("linear_predictor: index out of range");
  const Coefficients& b = state.beta(k);
  double eta = b.intercept + b.slope * covs.of(k)[t] + state.alpha[t] + state.gamma[j];
  if (k == Scenario::All) eta += state.delta[t];
  return eta;
}

double max_abs_predictor(const ParamState& state, const CovariateSeries& covs) {
  double m = 0.0;
  for (Scenario k : {Scenario::All, Scenario::Nat})
    for (std::size_t t = 0; t < state.num_years(); ++t)
      for (std::size_t j = 0; j < kMonths; ++j)
        m = std::max(m, std::abs(linear_predictor(state, covs, k, t, j)));
  return m;
}

double log_likelihood(const ParamState& state, const CountPanel& panel,
                      const CovariateSeries& covs) {
  const std::size_t T = panel.num_years();
  if (state.num_years() != T || covs.num_years() != T)
    throw std::invalid_argument("log_likelihood: panel, covariates and state disagree on T");
  double total = 0.0;
  for (Scenario k : {Scenario::All, Scenario::Nat})
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t j = 0; j < kMonths; ++j)
        total += log_binomial_pmf(panel.count(k, t, j), panel.ensemble_size(t),
                                  linear_predictor(state, covs, k, t, j));
  return total;
}

double log_normal_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * d * d / variance;
}

double log_gamma_density(std::span<const double, kMonths> gamma, double omega2) {
  double ss = 0.0;
  for (double g : gamma) ss += g * g;
  constexpr double dof = static_cast<double>(kMonths - 1);
  return -0.5 * dof * std::log(2.0 * std::numbers::pi * omega2) - 0.5 * ss / omega2;
}

double log_half_cauchy(double value, double scale) {
  if (!(value > 0.0)) return kNegInf;
  const double r = value / scale;
  return std::log(2.0 / (std::numbers::pi * scale)) - std::log1p(r * r);
}

double log_prior(const ParamState& state, const PriorConfig& config, const CovariateSeries& covs) {
  auto in_var_support = [&](double v) { return v > config.var_lower && v < config.var_upper; };
  if (!in_var_support(state.tau2) || !in_var_support(state.sigma2) || !(state.omega2 > 0.0))
    return kNegInf;
  const double gamma_sum = std::accumulate(state.gamma.begin(), state.gamma.end(), 0.0);
  if (!(std::abs(gamma_sum) <= 1e-9)) return kNegInf;
  if (config.logit_bound && !(max_abs_predictor(state, covs) < *config.logit_bound)) return kNegInf;

  double lp = 0.0;
  for (double a : state.alpha) lp += log_normal_density(a, 0.0, state.tau2);
  for (double d : state.delta) lp += log_normal_density(d, 0.0, state.sigma2);
  lp += log_gamma_density(state.gamma, state.omega2);

  const double width = config.var_upper - config.var_lower;
  lp += -2.0 * std::log(width);
  lp += log_half_cauchy(state.omega2, config.cauchy_scale);

  const double beta_var = config.beta_sd * config.beta_sd;
  for (const Coefficients* b : {&state.beta_all, &state.beta_nat}) {
    lp += log_normal_density(b->intercept, 0.0, beta_var);
    lp += log_normal_density(b->slope, 0.0, beta_var);
  }
  return lp;
}

void check_state(const ParamState& state, std::size_t num_years, double gamma_tol) {
  if (state.alpha.size() != num_years || state.delta.size() != num_years)
    throw ValidationError("parameter state has the wrong number of years");
  if (!(state.tau2 > 0.0) || !(state.sigma2 > 0.0) || !(state.omega2 > 0.0))
    throw ValidationError("variance parameters must be strictly positive");
  const double sum = std::accumulate(state.gamma.begin(), state.gamma.end(), 0.0);
  if (!(std::abs(sum) <= gamma_tol))
    throw ValidationError("monthly effects must sum to zero");
}

}  // namespace rrtime
