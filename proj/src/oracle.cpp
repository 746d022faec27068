#include "rrtime/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

namespace rrtime {

void GeneratorSpec::validate() const {
  const std::size_t T = years.size();
  if (T == 0) throw ValidationError("generator needs at least one year");
  if (ensemble_sizes.size() != T) throw ValidationError("generator ensemble schedule length mismatch");
  for (int n : ensemble_sizes)
    if (n < 1) throw ValidationError("generator ensemble sizes must be >= 1");
  covariates.validate(T);
  check_state(true_state, T);
}

std::vector<int> table_ensemble_schedule(std::size_t num_years) {
  std::vector<int> n(num_years);
  for (std::size_t t = 0; t < num_years; ++t) {
    const double pos = (static_cast<double>(t) + 0.5) / static_cast<double>(num_years) * 32.0;
    n[t] = pos < 15.0 ? 50 : (pos < 29.0 ? 100 : 400);
  }
  return n;
}

CountPanel generate_panel(const GeneratorSpec& spec) {
  spec.validate();
  const std::size_t T = spec.years.size();
  RandomStream rng(spec.seed);
  std::vector<int> all(T * kMonths), nat(T * kMonths);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < kMonths; ++j) {
      const int n = spec.ensemble_sizes[t];
      all[t * kMonths + j] =
          rng.binomial(n, inv_logit(linear_predictor(spec.true_state, spec.covariates, Scenario::All, t, j)));
      nat[t * kMonths + j] =
          rng.binomial(n, inv_logit(linear_predictor(spec.true_state, spec.covariates, Scenario::Nat, t, j)));
    }
  }
  return CountPanel(spec.years, std::move(all), std::move(nat), spec.ensemble_sizes);
}

void draw_random_effects(ParamState& state, RandomStream& rng) {
  const double tau = std::sqrt(state.tau2);
  const double sigma = std::sqrt(state.sigma2);
  const double omega = std::sqrt(state.omega2);
  for (double& a : state.alpha) a = tau * rng.normal();
  for (double& d : state.delta) d = sigma * rng.normal();
  for (double& g : state.gamma) g = omega * rng.normal();
  state.gamma = recenter_with_perturbation(state.gamma, 0, 0.0);
}

ParamState draw_from_prior(const PriorConfig& prior, const CovariateSeries& covs, RandomStream& rng) {
  prior.validate();
  const std::size_t T = covs.num_years();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    ParamState s = ParamState::zeros(T);
    for (Coefficients* b : {&s.beta_all, &s.beta_nat}) {
      b->intercept = prior.beta_sd * rng.normal();
      b->slope = prior.beta_sd * rng.normal();
    }
    const double width = prior.var_upper - prior.var_lower;
    s.tau2 = prior.var_lower + width * rng.uniform();
    s.sigma2 = prior.var_lower + width * rng.uniform();
    s.omega2 = prior.cauchy_scale * std::tan(0.5 * std::numbers::pi * rng.uniform());
    draw_random_effects(s, rng);
    if (!prior.logit_bound || max_abs_predictor(s, covs) < *prior.logit_bound) return s;
  }
  throw SamplerError("draw_from_prior: logit bound rejects essentially every prior draw");
}

double DensityGrid::integral() const {
  const auto m = marginal(Scenario::All);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < axis.size(); ++i) s += 0.5 * (m[i] + m[i + 1]) * (axis[i + 1] - axis[i]);
  return s;
}

std::vector<double> DensityGrid::marginal(Scenario k) const {
  const std::size_t n = axis.size();
  std::vector<double> m(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l + 1 < n; ++l) {
      const double h = axis[l + 1] - axis[l];
      const double a = k == Scenario::All ? at(i, l) : at(l, i);
      const double b = k == Scenario::All ? at(i, l + 1) : at(l + 1, i);
      s += 0.5 * (a + b) * h;
    }
    m[i] = s;
  }
  return m;
}

double DensityGrid::marginal_mean(Scenario k) const {
  const auto m = marginal(k);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
    const double h = axis[i + 1] - axis[i];
    num += 0.5 * (m[i] * axis[i] + m[i + 1] * axis[i + 1]) * h;
    den += 0.5 * (m[i] + m[i + 1]) * h;
  }
  return num / den;
}

double DensityGrid::marginal_cdf(Scenario k, double x) const {
  const auto m = marginal(k);
  const double total = integral();
  if (x <= axis.front()) return 0.0;
  if (x >= axis.back()) return 1.0;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
    const double h = axis[i + 1] - axis[i];
    if (x < axis[i + 1]) {
      const double d = x - axis[i];
      cum += m[i] * d + (m[i + 1] - m[i]) * d * d / (2.0 * h);
      break;
    }
    cum += 0.5 * (m[i] + m[i + 1]) * h;
  }
  return std::clamp(cum / total, 0.0, 1.0);
}

DensityGrid grid_posterior_2d(const CountPanel& panel, const CovariateSeries& covs,
                              const ParamState& fixed, const PriorConfig& prior, double lower,
                              double upper, std::size_t resolution) {
  if (resolution < 2 || !(lower < upper)) throw std::invalid_argument("grid_posterior_2d: bad grid");
  DensityGrid g;
  g.axis.resize(resolution);
  for (std::size_t i = 0; i < resolution; ++i)
    g.axis[i] = lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(resolution - 1);

  std::vector<double> logd(resolution * resolution);
  double best = -std::numeric_limits<double>::infinity();
  ParamState s = fixed;
  for (std::size_t i = 0; i < resolution; ++i) {
    s.beta_all.intercept = g.axis[i];
    for (std::size_t l = 0; l < resolution; ++l) {
      s.beta_nat.intercept = g.axis[l];
      const double lp = log_prior(s, prior, covs);
      const double v = std::isfinite(lp) ? lp + log_likelihood(s, panel, covs) : lp;
      logd[i * resolution + l] = v;
      best = std::max(best, v);
    }
  }
  if (!std::isfinite(best)) throw std::domain_error("grid_posterior_2d: posterior is zero on the whole grid");
  g.density.resize(logd.size());
  std::transform(logd.begin(), logd.end(), g.density.begin(), [&](double v) { return std::exp(v - best); });
  const double z = g.integral();
  for (double& d : g.density) d /= z;
  return g;
}

const std::vector<int>& SbcResult::ranks_of(const std::string& name) const {
  const auto it = std::find(parameters.begin(), parameters.end(), name);
  if (it == parameters.end()) throw std::out_of_range("unknown SBC parameter " + name);
  return ranks[static_cast<std::size_t>(it - parameters.begin())];
}

std::vector<std::string> sbc_parameters() {
  return {"beta_A0", "beta_A1", "beta_N0", "beta_N1", "tau2", "sigma2", "omega2"};
}

double sbc_value(const ParamState& s, const std::string& name) {
  if (name == "beta_A0") return s.beta_all.intercept;
  if (name == "beta_A1") return s.beta_all.slope;
  if (name == "beta_N0") return s.beta_nat.intercept;
  if (name == "beta_N1") return s.beta_nat.slope;
  if (name == "tau2") return s.tau2;
  if (name == "sigma2") return s.sigma2;
  if (name == "omega2") return s.omega2;
  throw std::out_of_range("unknown SBC parameter " + name);
}

SbcResult sbc_run(const SbcSetup& setup) {
  if (setup.replicates < 20) throw ValidationError("SBC needs at least 20 replicates");
  if (setup.prior.var_upper > 1e6) throw ValidationError("SBC needs a practical variance prior");
  const std::size_t T = setup.covariates.num_years();
  const auto names = sbc_parameters();
  SbcResult result;
  result.parameters = names;
  result.max_rank = static_cast<int>(setup.sampler.retained_count());
  result.ranks.assign(names.size(), std::vector<int>(setup.replicates, 0));

  std::vector<int> years(T);
  std::iota(years.begin(), years.end(), 1);

  auto one_replicate = [&](std::size_t r) {
    RandomStream truth_rng(derive_seed(setup.master_seed, 2 * r));
    GeneratorSpec spec;
    spec.years = years;
    spec.ensemble_sizes.assign(T, setup.ensemble_size);
    spec.covariates = setup.covariates;
    spec.true_state = draw_from_prior(setup.prior, setup.covariates, truth_rng);
    spec.seed = truth_rng();
    const CountPanel panel = generate_panel(spec);

    SamplerConfig cfg = setup.sampler;
    cfg.seed = derive_seed(setup.master_seed, 2 * r + 1);
    PosteriorDraws draws;
    try {
      draws = run_sampler(panel, setup.covariates, setup.prior, cfg);
    } catch (const std::exception& e) {
      throw SamplerError("SBC replicate " + std::to_string(r) + ": " + e.what());
    }
    for (std::size_t p = 0; p < names.size(); ++p) {
      const double truth = sbc_value(spec.true_state, names[p]);
      int rank = 0;
      for (const auto& s : draws.states)
        if (sbc_value(s, names[p]) < truth) ++rank;
      result.ranks[p][r] = rank;
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(setup.threads, setup.replicates));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < setup.replicates; r = next++) {
      try {
        one_replicate(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = setup.replicates;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace rrtime
