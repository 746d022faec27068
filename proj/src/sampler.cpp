#include "rrtime/sampler.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>

namespace rrtime {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normal log density without the 2*pi constant.
inline double log_normal_kernel(double x, double variance) {
  return -0.5 * (x * x / variance + std::log(variance));
}

inline double cell_loglik(int z, double n, double x) { return z * x - n * softplus(x); }

// Fixed block layout: T year blocks, 12 month blocks, then scalar blocks.
struct BlockLayout {
  std::size_t T;

  std::size_t year(std::size_t t) const { return t; }
  std::size_t month(std::size_t j) const { return T + j; }
  std::size_t beta(Scenario k) const { return T + kMonths + (k == Scenario::All ? 0 : 1); }
  std::size_t tau2_ancillary() const { return T + kMonths + 2; }
  std::size_t sigma2_ancillary() const { return T + kMonths + 3; }
  std::size_t tau2_sufficient() const { return T + kMonths + 4; }
  std::size_t sigma2_sufficient() const { return T + kMonths + 5; }
  std::size_t omega2() const { return T + kMonths + 6; }
  std::size_t size() const { return T + kMonths + 7; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (std::size_t t = 0; t < T; ++t) out.push_back("alpha_delta[" + std::to_string(t + 1) + "]");
    for (std::size_t j = 0; j < kMonths; ++j) out.push_back("gamma[" + std::to_string(j + 1) + "]");
    for (const char* s : {"beta_A", "beta_N", "tau2_ancillary", "sigma2_ancillary",
                          "tau2_sufficient", "sigma2_sufficient", "omega2"})
      out.emplace_back(s);
    return out;
  }

  std::vector<bool> active(const FrozenComponents& f) const {
    std::vector<bool> on(size(), true);
    for (std::size_t t = 0; t < T; ++t) on[year(t)] = !f.year_effects;
    for (std::size_t j = 0; j < kMonths; ++j) on[month(j)] = !f.month_effects;
    on[tau2_ancillary()] = on[sigma2_ancillary()] = !f.variances && !f.year_effects;
    on[tau2_sufficient()] = on[sigma2_sufficient()] = on[omega2()] = !f.variances;
    return on;
  }

  std::vector<double> initial_sds(const InitialStepSizes& s) const {
    std::vector<double> sd(size(), s.log_variance);
    for (std::size_t t = 0; t < T; ++t) sd[year(t)] = s.year_effects;
    for (std::size_t j = 0; j < kMonths; ++j) sd[month(j)] = s.month_effect;
    sd[beta(Scenario::All)] = sd[beta(Scenario::Nat)] = s.beta;
    return sd;
  }
};

class Chain {
 public:
  Chain(const CountPanel& panel, const CovariateSeries& covs, const PriorConfig& prior,
        const SamplerConfig& config, ParamState init, RandomStream& rng)
      : panel_(panel),
        covs_(covs),
        prior_(prior),
        config_(config),
        rng_(rng),
        layout_{panel.num_years()},
        state_(std::move(init)),
        sd_(layout_.initial_sds(config.initial_steps)),
        active_(layout_.active(config.frozen)),
        attempts_(layout_.size(), 0),
        accepts_(layout_.size(), 0),
        bound_(prior.logit_bound.value_or(std::numeric_limits<double>::infinity())),
        n_(panel.num_years()) {
    for (std::size_t t = 0; t < n_.size(); ++t) n_[t] = panel.ensemble_size(t);
  }

  const BlockLayout& layout() const { return layout_; }
  const ParamState& state() const { return state_; }
  std::vector<double>& step_sds() { return sd_; }
  const std::vector<bool>& active() const { return active_; }

  void reset_counters() {
    std::fill(attempts_.begin(), attempts_.end(), 0);
    std::fill(accepts_.begin(), accepts_.end(), 0);
  }

  std::vector<double> rates() const {
    std::vector<double> r(layout_.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t b = 0; b < r.size(); ++b)
      if (attempts_[b] > 0) r[b] = static_cast<double>(accepts_[b]) / attempts_[b];
    return r;
  }

  void iterate() {
    const FrozenComponents& f = config_.frozen;
    if (!f.year_effects) step_year_effects();
    if (!f.month_effects) step_month_effects();
    step_beta_ancillary();
    if (!f.year_effects && !f.slopes && config_.beta_sufficient_step != BetaSufficientStep::Skip)
      step_beta_sufficient();
    if (!f.variances && !f.year_effects) step_variances_ancillary();
    if (!f.variances) {
      step_variances_sufficient();
      step_omega2();
    }
  }

 private:
  double x(Scenario k, std::size_t t) const { return covs_.of(k)[t]; }

  double trend(Scenario k, const Coefficients& b, std::size_t t) const {
    return b.intercept + b.slope * x(k, t);
  }

  // Sum over the 12 months of one (scenario, year) row; -inf on a bound violation.
  double row_loglik(Scenario k, std::size_t t, double base,
                    const std::array<double, kMonths>& gamma) const {
    const int* z = panel_.counts(k).data() + t * kMonths;
    const double n = n_[t];
    double s = 0.0;
    for (std::size_t j = 0; j < kMonths; ++j) {
      const double eta = base + gamma[j];
      if (!(std::abs(eta) < bound_)) return kNegInf;
      s += cell_loglik(z[j], n, eta);
    }
    return s;
  }

  double log_uniform_variance(double v) const {
    return (v > prior_.var_lower && v < prior_.var_upper) ? 0.0 : kNegInf;
  }

  void record(std::size_t block, bool accepted) {
    ++attempts_[block];
    if (accepted) ++accepts_[block];
  }

  void step_year_effects() {
    const double rho = config_.prop_corr_alpha_delta;
    for (std::size_t t = 0; t < layout_.T; ++t) {
      const double trend_all = trend(Scenario::All, state_.beta_all, t);
      const double trend_nat = trend(Scenario::Nat, state_.beta_nat, t);
      auto target = [&](const std::array<double, 2>& v) {
        const double ll_all = row_loglik(Scenario::All, t, trend_all + v[0] + v[1], state_.gamma);
        if (ll_all == kNegInf) return kNegInf;
        const double ll_nat = row_loglik(Scenario::Nat, t, trend_nat + v[0], state_.gamma);
        return ll_all + ll_nat + log_normal_kernel(v[0], state_.tau2) +
               log_normal_kernel(v[1], state_.sigma2);
      };
      const std::array<double, 2> cur{state_.alpha[t], state_.delta[t]};
      const auto res = rwmh_block<2>(cur, target(cur), target,
                                     Proposal<2>::make(sd_[layout_.year(t)], rho), rng_);
      state_.alpha[t] = res.value[0];
      state_.delta[t] = res.value[1];
      record(layout_.year(t), res.accepted);
    }
  }

  void step_month_effects() {
    const std::size_t T = layout_.T;
    std::vector<double> base_all(T), base_nat(T);
    for (std::size_t t = 0; t < T; ++t) {
      base_all[t] = trend(Scenario::All, state_.beta_all, t) + state_.alpha[t] + state_.delta[t];
      base_nat[t] = trend(Scenario::Nat, state_.beta_nat, t) + state_.alpha[t];
    }
    auto target = [&](const std::array<double, kMonths>& g) {
      double s = log_gamma_density(g, state_.omega2);
      for (std::size_t t = 0; t < T && s != kNegInf; ++t) {
        s += row_loglik(Scenario::All, t, base_all[t], g);
        s += row_loglik(Scenario::Nat, t, base_nat[t], g);
      }
      return s;
    };
    double current = target(state_.gamma);
    for (std::size_t j = 0; j < kMonths; ++j) {
      const auto cand = propose_gamma(state_.gamma, j, sd_[layout_.month(j)], rng_);
      const double lt = target(cand);
      const bool ok = metropolis_accept(current, lt, rng_);
      if (ok) {
        state_.gamma = cand;
        current = lt;
      }
      record(layout_.month(j), ok);
    }
  }

  double scenario_loglik(Scenario k, const Coefficients& b) const {
    double s = 0.0;
    for (std::size_t t = 0; t < layout_.T; ++t) {
      double base = trend(k, b, t) + state_.alpha[t];
      if (k == Scenario::All) base += state_.delta[t];
      s += row_loglik(k, t, base, state_.gamma);
      if (s == kNegInf) break;
    }
    return s;
  }

  void step_beta_ancillary() {
    const double beta_var = prior_.beta_sd * prior_.beta_sd;
    for (Scenario k : {Scenario::All, Scenario::Nat}) {
      Coefficients& b = state_.beta(k);
      const std::size_t block = layout_.beta(k);
      if (config_.frozen.slopes) {
        const double slope = b.slope;
        auto target = [&](const std::array<double, 1>& v) {
          return scenario_loglik(k, {v[0], slope}) + log_normal_kernel(v[0], beta_var);
        };
        const std::array<double, 1> cur{b.intercept};
        const auto res = rwmh_block<1>(cur, target(cur), target, Proposal<1>::make(sd_[block]), rng_);
        b.intercept = res.value[0];
        record(block, res.accepted);
      } else {
        const double rho = k == Scenario::All ? config_.prop_corr_beta_all : config_.prop_corr_beta_nat;
        auto target = [&](const std::array<double, 2>& v) {
          return scenario_loglik(k, {v[0], v[1]}) + log_normal_kernel(v[0], beta_var) +
                 log_normal_kernel(v[1], beta_var);
        };
        const std::array<double, 2> cur{b.intercept, b.slope};
        const auto res =
            rwmh_block<2>(cur, target(cur), target, Proposal<2>::make(sd_[block], rho), rng_);
        b = {res.value[0], res.value[1]};
        record(block, res.accepted);
      }
    }
  }

  void step_beta_sufficient() {
    const std::size_t T = layout_.T;
    const auto latents = AugmentedLatents::from_state(state_, covs_);
    const auto& eta = latents.eta;
    const auto& nu = latents.nu;
    const double tau2 = state_.tau2;
    const double sigma2 = state_.sigma2;

    Coefficients beta_all, beta_nat;
    if (config_.beta_sufficient_step == BetaSufficientStep::ExactConditional) {
      // beta_A | eta, nu, beta_N: nu - alpha = x_A beta_A + delta, delta ~ N(0, sigma2).
      std::vector<double> y(T);
      for (std::size_t t = 0; t < T; ++t) y[t] = nu[t] - state_.alpha[t];
      beta_all = gibbs_beta(y, covs_.x_all, sigma2, prior_.beta_sd, rng_);
      // beta_N | eta, nu, beta_A: eta ~ N(x_N beta_N, tau2) and
      // eta + x_A beta_A - nu ~ N(x_N beta_N, sigma2), pooled by precision.
      const double w_eta = 1.0 / tau2;
      const double w_nu = 1.0 / sigma2;
      const double pooled_var = 1.0 / (w_eta + w_nu);
      for (std::size_t t = 0; t < T; ++t) {
        const double second = eta[t] + trend(Scenario::All, beta_all, t) - nu[t];
        y[t] = (w_eta * eta[t] + w_nu * second) * pooled_var;
      }
      beta_nat = gibbs_beta(y, covs_.x_nat, pooled_var, prior_.beta_sd, rng_);
    } else {
      beta_all = gibbs_beta(nu, covs_.x_all, tau2 + sigma2, prior_.beta_sd, rng_);
      beta_nat = gibbs_beta(eta, covs_.x_nat, tau2, prior_.beta_sd, rng_);
    }
    state_.beta_all = beta_all;
    state_.beta_nat = beta_nat;
    for (std::size_t t = 0; t < T; ++t) {
      state_.alpha[t] = eta[t] - trend(Scenario::Nat, beta_nat, t);
      state_.delta[t] = nu[t] - trend(Scenario::All, beta_all, t) - state_.alpha[t];
    }
  }

  void step_variances_ancillary() {
    const std::size_t T = layout_.T;
    const double tau = std::sqrt(state_.tau2);
    const double sigma = std::sqrt(state_.sigma2);
    std::vector<double> kappa(T), xi(T), trend_all(T), trend_nat(T);
    for (std::size_t t = 0; t < T; ++t) {
      kappa[t] = state_.alpha[t] / tau;
      xi[t] = state_.delta[t] / sigma;
      trend_all[t] = trend(Scenario::All, state_.beta_all, t);
      trend_nat[t] = trend(Scenario::Nat, state_.beta_nat, t);
    }

    {
      auto target = [&](const std::array<double, 1>& u) {
        const double v = std::exp(u[0]);
        double s = log_uniform_variance(v) + u[0];
        const double scale = std::sqrt(v);
        for (std::size_t t = 0; t < T && s != kNegInf; ++t) {
          const double a = scale * kappa[t];
          s += row_loglik(Scenario::All, t, trend_all[t] + a + state_.delta[t], state_.gamma);
          s += row_loglik(Scenario::Nat, t, trend_nat[t] + a, state_.gamma);
        }
        return s;
      };
      const std::size_t block = layout_.tau2_ancillary();
      const std::array<double, 1> cur{std::log(state_.tau2)};
      const auto res = rwmh_block<1>(cur, target(cur), target, Proposal<1>::make(sd_[block]), rng_);
      if (res.accepted) {
        state_.tau2 = std::exp(res.value[0]);
        const double scale = std::sqrt(state_.tau2);
        for (std::size_t t = 0; t < T; ++t) state_.alpha[t] = scale * kappa[t];
      }
      record(block, res.accepted);
    }
    {
      auto target = [&](const std::array<double, 1>& u) {
        const double v = std::exp(u[0]);
        double s = log_uniform_variance(v) + u[0];
        const double scale = std::sqrt(v);
        for (std::size_t t = 0; t < T && s != kNegInf; ++t)
          s += row_loglik(Scenario::All, t, trend_all[t] + state_.alpha[t] + scale * xi[t],
                          state_.gamma);
        return s;
      };
      const std::size_t block = layout_.sigma2_ancillary();
      const std::array<double, 1> cur{std::log(state_.sigma2)};
      const auto res = rwmh_block<1>(cur, target(cur), target, Proposal<1>::make(sd_[block]), rng_);
      if (res.accepted) {
        state_.sigma2 = std::exp(res.value[0]);
        const double scale = std::sqrt(state_.sigma2);
        for (std::size_t t = 0; t < T; ++t) state_.delta[t] = scale * xi[t];
      }
      record(block, res.accepted);
    }
  }

  void update_variance_given_effects(double& variance, const std::vector<double>& effects,
                                     std::size_t block) {
    auto target = [&](const std::array<double, 1>& u) {
      const double v = std::exp(u[0]);
      double s = log_uniform_variance(v);
      if (s == kNegInf) return s;
      s += u[0];
      for (double e : effects) s += log_normal_kernel(e, v);
      return s;
    };
    const std::array<double, 1> cur{std::log(variance)};
    const auto res = rwmh_block<1>(cur, target(cur), target, Proposal<1>::make(sd_[block]), rng_);
    if (res.accepted) variance = std::exp(res.value[0]);
    record(block, res.accepted);
  }

  void step_variances_sufficient() {
    update_variance_given_effects(state_.tau2, state_.alpha, layout_.tau2_sufficient());
    update_variance_given_effects(state_.sigma2, state_.delta, layout_.sigma2_sufficient());
  }

  void step_omega2() {
    auto target = [&](const std::array<double, 1>& u) {
      const double v = std::exp(u[0]);
      return log_gamma_density(state_.gamma, v) + log_half_cauchy(v, prior_.cauchy_scale) + u[0];
    };
    const std::size_t block = layout_.omega2();
    const std::array<double, 1> cur{std::log(state_.omega2)};
    const auto res = rwmh_block<1>(cur, target(cur), target, Proposal<1>::make(sd_[block]), rng_);
    if (res.accepted) state_.omega2 = std::exp(res.value[0]);
    record(block, res.accepted);
  }

  const CountPanel& panel_;
  const CovariateSeries& covs_;
  const PriorConfig& prior_;
  const SamplerConfig& config_;
  RandomStream& rng_;
  BlockLayout layout_;
  ParamState state_;
  std::vector<double> sd_;
  std::vector<bool> active_;
  std::vector<long> attempts_;
  std::vector<long> accepts_;
  double bound_;
  std::vector<double> n_;
};

template <class T>
std::vector<T> select_active(const std::vector<T>& all, const std::vector<bool>& active) {
  std::vector<T> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (active[i]) out.push_back(all[i]);
  return out;
}

TuneResult run_tuning(Chain& chain, const SamplerConfig& config) {
  TuneResult out;
  const auto names = chain.layout().names();
  const auto& active = chain.active();
  std::vector<double> last;
  for (int c = 0; c < config.tune_cycles; ++c) {
    chain.reset_counters();
    for (int i = 0; i < config.tune_iterations[static_cast<std::size_t>(c)]; ++i) chain.iterate();
    last = chain.rates();
    auto& sds = chain.step_sds();
    for (std::size_t b = 0; b < sds.size(); ++b)
      if (active[b])
        sds[b] = adjust_step(sds[b], last[b], config.target_accept_lower, config.target_accept_upper);
    out.cycle_acceptance.push_back(select_active(last, active));
  }
  for (std::size_t b = 0; b < last.size(); ++b) {
    if (!active[b]) continue;
    if (last[b] < config.target_accept_lower || last[b] > config.target_accept_upper) {
      std::ostringstream msg;
      msg << "block " << names[b] << " ended tuning at acceptance " << last[b]
          << " outside [" << config.target_accept_lower << ", " << config.target_accept_upper << "]";
      out.warnings.push_back(msg.str());
    }
  }
  out.block_names = select_active(names, active);
  out.proposal_sds = select_active(chain.step_sds(), active);
  out.state = chain.state();
  return out;
}

void check_inputs(const CountPanel& panel, const CovariateSeries& covs, const PriorConfig& prior,
                  const SamplerConfig& config) {
  config.validate();
  prior.validate();
  covs.validate(panel.num_years());
}

ParamState starting_state(const CountPanel& panel, const CovariateSeries& covs,
                          const PriorConfig& prior, const SamplerConfig& config) {
  ParamState init = config.initial_state ? *config.initial_state : default_initial_state(panel, prior);
  try {
    check_state(init, panel.num_years());
  } catch (const ValidationError& e) {
    throw SamplerError(std::string("invalid initial state: ") + e.what());
  }
  const double ll = log_likelihood(init, panel, covs);
  if (!std::isfinite(ll)) throw SamplerError("non-finite log posterior at initial state: log_likelihood");
  const double lp = log_prior(init, prior, covs);
  if (!std::isfinite(lp)) {
    std::string what = "log_prior";
    if (!(init.tau2 > prior.var_lower && init.tau2 < prior.var_upper)) what += " (tau2 outside support)";
    else if (!(init.sigma2 > prior.var_lower && init.sigma2 < prior.var_upper)) what += " (sigma2 outside support)";
    else if (prior.logit_bound && !(max_abs_predictor(init, covs) < *prior.logit_bound)) what += " (logit bound)";
    throw SamplerError("non-finite log posterior at initial state: " + what);
  }
  return init;
}

}  // namespace

const char* to_string(BetaSufficientStep s) {
  switch (s) {
    case BetaSufficientStep::ExactConditional: return "exact_conditional";
    case BetaSufficientStep::IndependentMarginal: return "independent_marginal";
    case BetaSufficientStep::Skip: return "skip";
  }
  return "unknown";
}

void SamplerConfig::validate() const {
  if (iterations < 1) throw ValidationError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw ValidationError("burn_in must lie in [0, iterations)");
  if (thin < 1) throw ValidationError("thin must be positive");
  if (tune_cycles < 1) throw ValidationError("tune_cycles must be positive");
  if (tune_iterations.size() != static_cast<std::size_t>(tune_cycles))
    throw ValidationError("tune_iterations needs one entry per tuning cycle");
  for (int n : tune_iterations)
    if (n < 1) throw ValidationError("tuning cycles need at least one iteration");
  if (!(target_accept_lower > 0.0 && target_accept_lower < target_accept_upper && target_accept_upper < 1.0))
    throw ValidationError("target acceptance band must satisfy 0 < lower < upper < 1");
  for (double r : {prop_corr_alpha_delta, prop_corr_beta_all, prop_corr_beta_nat})
    if (!(std::abs(r) < 1.0)) throw ValidationError("proposal correlations must lie in (-1, 1)");
  const auto& s = initial_steps;
  for (double v : {s.year_effects, s.month_effect, s.beta, s.log_variance})
    if (!(v > 0.0)) throw ValidationError("initial step sizes must be positive");
}

std::size_t SamplerConfig::retained_count() const {
  return static_cast<std::size_t>((iterations - burn_in) / thin) + 1;
}

bool SamplerConfig::retains(int i) const { return i >= burn_in && (i - burn_in) % thin == 0; }

double adjust_step(double step_sd, double acceptance_rate, double lower, double upper) {
  if (std::isnan(acceptance_rate)) return step_sd;
  if (acceptance_rate > upper) return step_sd * kTuneFactor;
  if (acceptance_rate < lower) return step_sd / kTuneFactor;
  return step_sd;
}

AugmentedLatents AugmentedLatents::from_state(const ParamState& state, const CovariateSeries& covs) {
  const std::size_t T = state.num_years();
  AugmentedLatents l;
  l.eta.resize(T);
  l.nu.resize(T);
  l.kappa.resize(T);
  l.xi.resize(T);
  const double tau = std::sqrt(state.tau2);
  const double sigma = std::sqrt(state.sigma2);
  for (std::size_t t = 0; t < T; ++t) {
    l.eta[t] = state.beta_nat.intercept + state.beta_nat.slope * covs.x_nat[t] + state.alpha[t];
    l.nu[t] = state.beta_all.intercept + state.beta_all.slope * covs.x_all[t] + state.alpha[t] +
              state.delta[t];
    l.kappa[t] = state.alpha[t] / tau;
    l.xi[t] = state.delta[t] / sigma;
  }
  return l;
}

double AugmentedLatents::reconstruction_error(const ParamState& state,
                                              const CovariateSeries& covs) const {
  double err = 0.0;
  const double tau = std::sqrt(state.tau2);
  const double sigma = std::sqrt(state.sigma2);
  for (std::size_t t = 0; t < state.num_years(); ++t) {
    const double alpha_from_eta = eta[t] - state.beta_nat.intercept - state.beta_nat.slope * covs.x_nat[t];
    const double delta_from_nu =
        nu[t] - state.beta_all.intercept - state.beta_all.slope * covs.x_all[t] - state.alpha[t];
    err = std::max({err, std::abs(alpha_from_eta - state.alpha[t]),
                    std::abs(delta_from_nu - state.delta[t]),
                    std::abs(kappa[t] * tau - state.alpha[t]),
                    std::abs(xi[t] * sigma - state.delta[t])});
  }
  return err;
}

bool metropolis_accept(double log_target_current, double log_target_proposed, RandomStream& rng) {
  // Always draw so the stream position does not depend on the outcome.
  const double u = rng.uniform();
  if (!std::isfinite(log_target_proposed)) return false;
  const double log_ratio = log_target_proposed - log_target_current;
  return log_ratio >= 0.0 || std::log(u) < log_ratio;
}

std::array<double, kMonths> recenter_with_perturbation(const std::array<double, kMonths>& gamma,
                                                       std::size_t j, double perturbation) {
  if (j >= kMonths) throw std::out_of_range("month index");
  std::array<double, kMonths> g = gamma;
  g[j] += perturbation;
  // Two passes: the second removes the rounding residue of the first.
  for (int pass = 0; pass < 2; ++pass) {
    const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(kMonths);
    for (double& v : g) v -= m;
  }
  return g;
}

std::array<double, kMonths> propose_gamma(const std::array<double, kMonths>& gamma, std::size_t j,
                                          double step_sd, RandomStream& rng) {
  return recenter_with_perturbation(gamma, j, step_sd * rng.normal());
}

BetaPosterior beta_posterior(std::span<const double> y, std::span<const double> x, double variance,
                             double prior_sd) {
  if (y.size() != x.size() || y.empty()) throw std::invalid_argument("gibbs_beta: bad design");
  if (!(variance > 0.0) || !(prior_sd > 0.0))
    throw std::invalid_argument("gibbs_beta: variance and prior sd must be positive");
  double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    sx += x[t];
    sxx += x[t] * x[t];
    sy += y[t];
    sxy += x[t] * y[t];
  }
  const double prior_prec = 1.0 / (prior_sd * prior_sd);
  const double n = static_cast<double>(y.size());
  const double p11 = n / variance + prior_prec;
  const double p12 = sx / variance;
  const double p22 = sxx / variance + prior_prec;
  const double det = p11 * p22 - p12 * p12;
  if (!(det > 0.0) || !(p11 > 0.0)) throw SamplerError("gibbs_beta: posterior precision not positive definite");
  const BetaPosterior post{
      {(p22 * sy - p12 * sxy) / (variance * det), (p11 * sxy - p12 * sy) / (variance * det)},
      {p22 / det, -p12 / det, p11 / det}};
  return post;
}

Coefficients gibbs_beta(std::span<const double> y, std::span<const double> x, double variance,
                        double prior_sd, RandomStream& rng) {
  const BetaPosterior post = beta_posterior(y, x, variance, prior_sd);
  const double l11 = std::sqrt(post.cov[0]);
  const double l21 = post.cov[1] / l11;
  const double l22 = std::sqrt(std::max(0.0, post.cov[2] - l21 * l21));
  const double z0 = rng.normal();
  const double z1 = rng.normal();
  return {post.mean[0] + l11 * z0, post.mean[1] + l21 * z0 + l22 * z1};
}

ParamState default_initial_state(const CountPanel& panel, const PriorConfig& prior) {
  ParamState s = ParamState::zeros(panel.num_years());
  double trials = 0.0;
  for (int n : panel.ensemble_sizes()) trials += static_cast<double>(n) * kMonths;
  for (Scenario k : {Scenario::All, Scenario::Nat}) {
    const auto c = panel.counts(k);
    const double events = std::accumulate(c.begin(), c.end(), 0.0);
    double v = logit((events + 0.5) / (trials + 1.0));
    if (prior.logit_bound) {
      const double L = *prior.logit_bound;
      const double margin = L > 2.0 ? L - 1.0 : 0.5 * L;
      v = std::clamp(v, -margin, margin);
    }
    s.beta(k).intercept = v;
  }
  return s;
}

TuneResult tune(const CountPanel& panel, const CovariateSeries& covs, const PriorConfig& prior,
                const SamplerConfig& config) {
  check_inputs(panel, covs, prior, config);
  RandomStream rng(config.seed, config.stream);
  Chain chain(panel, covs, prior, config, starting_state(panel, covs, prior, config), rng);
  return run_tuning(chain, config);
}

PosteriorDraws run_sampler(const CountPanel& panel, const CovariateSeries& covs,
                           const PriorConfig& prior, const SamplerConfig& config) {
  check_inputs(panel, covs, prior, config);
  RandomStream rng(config.seed, config.stream);
  Chain chain(panel, covs, prior, config, starting_state(panel, covs, prior, config), rng);
  TuneResult tuned = run_tuning(chain, config);

  PosteriorDraws draws;
  draws.config_echo = config;
  draws.block_names = tuned.block_names;
  draws.proposal_sds = tuned.proposal_sds;
  draws.tuning_acceptance = std::move(tuned.cycle_acceptance);
  draws.tuning_warnings = std::move(tuned.warnings);
  draws.states.reserve(config.retained_count());

  chain.reset_counters();
  if (config.retains(0)) draws.states.push_back(chain.state());
  for (int i = 1; i <= config.iterations; ++i) {
    chain.iterate();
    if (config.retains(i)) draws.states.push_back(chain.state());
  }
  draws.acceptance_rates = select_active(chain.rates(), chain.active());
  return draws;
}

PosteriorDraws run_chains(const CountPanel& panel, const CovariateSeries& covs,
                          const PriorConfig& prior, const SamplerConfig& config,
                          std::size_t num_chains) {
  if (num_chains == 0) throw ValidationError("need at least one chain");
  if (num_chains == 1) return run_sampler(panel, covs, prior, config);
  std::vector<std::future<PosteriorDraws>> futures;
  for (std::size_t c = 0; c < num_chains; ++c) {
    SamplerConfig cfg = config;
    cfg.stream = config.stream + static_cast<std::uint32_t>(c);
    futures.push_back(std::async(std::launch::async, [&panel, &covs, &prior, cfg] {
      return run_sampler(panel, covs, prior, cfg);
    }));
  }
  PosteriorDraws merged;
  for (std::size_t c = 0; c < num_chains; ++c) {
    PosteriorDraws d = futures[c].get();
    if (c == 0) {
      merged = std::move(d);
      continue;
    }
    merged.states.insert(merged.states.end(), d.states.begin(), d.states.end());
    for (std::size_t b = 0; b < merged.acceptance_rates.size(); ++b)
      merged.acceptance_rates[b] += d.acceptance_rates[b];
    for (auto& w : d.tuning_warnings) merged.tuning_warnings.push_back("chain " + std::to_string(c) + ": " + w);
  }
  for (double& r : merged.acceptance_rates) r /= static_cast<double>(num_chains);
  merged.num_chains = num_chains;
  merged.config_echo = config;
  return merged;
}

}  // namespace rrtime
