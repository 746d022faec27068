#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "rrtime/model.hpp"
#include "rrtime/rng.hpp"

using namespace rrtime;

namespace {

CountPanel one_cell_panel(int z, int n) {
  std::vector<int> all(kMonths, 0), nat(kMonths, 0);
  all[0] = z;
  return CountPanel({2000}, all, nat, {n});
}

CovariateSeries flat_covs(std::size_t T, double xa = 0.0, double xn = 0.0) {
  CovariateSeries c;
  c.x_all.assign(T, xa);
  c.x_nat.assign(T, xn);
  return c;
}

ParamState random_state(std::size_t T, RandomStream& rng) {
  ParamState s = ParamState::zeros(T);
  for (auto& a : s.alpha) a = 0.5 * rng.normal();
  for (auto& d : s.delta) d = 0.3 * rng.normal();
  double m = 0.0;
  for (auto& g : s.gamma) m += (g = 0.4 * rng.normal());
  for (auto& g : s.gamma) g -= m / kMonths;
  s.beta_all = {-2.0 + 0.3 * rng.normal(), 0.3 * rng.normal()};
  s.beta_nat = {-2.3 + 0.3 * rng.normal(), 0.3 * rng.normal()};
  s.tau2 = 0.4;
  s.sigma2 = 0.2;
  s.omega2 = 0.3;
  return s;
}

double naive_log_binomial(int z, int n, double p) {
  return std::lgamma(n + 1.0) - std::lgamma(z + 1.0) - std::lgamma(n - z + 1.0) + z * std::log(p) +
         (n - z) * std::log1p(-p);
}

}  // namespace

TEST_CASE("logit basics") {
  CHECK(logit(0.5) == 0.0);
  CHECK(logit(0.75) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(std::abs(inv_logit(logit(0.0083)) - 0.0083) < 1e-12);
  CHECK_THROWS_AS(logit(0.0), std::domain_error);
  CHECK_THROWS_AS(logit(1.0), std::domain_error);
  CHECK_THROWS_AS(logit(-0.1), std::domain_error);
}

TEST_CASE("inv_logit round trip over the full probability range") {
  for (double lp = -8.0; lp <= -1e-9; lp += 0.01) {
    const double p = std::pow(10.0, lp);
    CHECK(std::abs(inv_logit(logit(p)) - p) < 1e-12);
    CHECK(std::abs(inv_logit(logit(1.0 - p)) - (1.0 - p)) < 1e-12);
  }
}

TEST_CASE("inv_logit is stable at extreme arguments") {
  CHECK(inv_logit(-800.0) >= 0.0);
  CHECK(inv_logit(-20.0) == doctest::Approx(std::exp(-20.0) / (1 + std::exp(-20.0))).epsilon(1e-14));
  CHECK(inv_logit(800.0) == 1.0);
  CHECK(std::isfinite(softplus(800.0)));
  CHECK(softplus(800.0) == doctest::Approx(800.0));
  CHECK(softplus(-800.0) >= 0.0);
}

TEST_CASE("linear predictor hand-computed values") {
  ParamState s = ParamState::zeros(1);
  const auto zero_covs = flat_covs(1);
  CHECK(linear_predictor(s, zero_covs, Scenario::All, 0, 0) == 0.0);

  s.beta_all = {1.0, 0.5};
  s.beta_nat = {1.0, 0.5};
  s.alpha[0] = 0.1;
  s.delta[0] = 0.2;
  s.gamma[3] = -0.3;
  const auto covs = flat_covs(1, 2.0, 2.0);
  CHECK(linear_predictor(s, covs, Scenario::All, 0, 3) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(linear_predictor(s, covs, Scenario::Nat, 0, 3) == doctest::Approx(1.8).epsilon(1e-15));
  CHECK_THROWS_AS(linear_predictor(s, covs, Scenario::All, 1, 0), std::out_of_range);
  CHECK_THROWS_AS(linear_predictor(s, covs, Scenario::All, 0, 12), std::out_of_range);
}

TEST_CASE("single-cell log likelihood") {
  // n = 1, Z = 1, predictor 0: the 23 empty cells (n = 1, Z = 0, p = 1/2) add 23 log(1/2).
  {
    const auto panel = one_cell_panel(1, 1);
    const double ll = log_likelihood(ParamState::zeros(1), panel, flat_covs(1));
    CHECK(ll == doctest::Approx(24.0 * std::log(0.5)).epsilon(1e-14));
  }
  CHECK(log_binomial_pmf(1, 1, 0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  const double expected = std::log(2118760.0) + 5 * std::log(0.1) + 45 * std::log(0.9);
  CHECK(log_binomial_pmf(5, 50, logit(0.1)) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(log_choose(400, 200) == doctest::Approx(std::lgamma(401.0) - 2 * std::lgamma(201.0)).epsilon(1e-13));
  CHECK(std::isfinite(log_choose(400, 200)));
}

TEST_CASE("full-panel log likelihood equals the per-cell brute-force sum") {
  RandomStream rng(17);
  const std::size_t T = 6;
  std::vector<int> ns = {50, 50, 100, 100, 400, 400};
  std::vector<int> all(T * kMonths), nat(T * kMonths);
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i] = rng.binomial(ns[i / kMonths], 0.12);
    nat[i] = rng.binomial(ns[i / kMonths], 0.08);
  }
  std::vector<int> years(T);
  std::iota(years.begin(), years.end(), 1990);
  const CountPanel panel(years, all, nat, ns);
  CovariateSeries covs;
  for (std::size_t t = 0; t < T; ++t) {
    covs.x_all.push_back(0.3 * rng.normal());
    covs.x_nat.push_back(0.3 * rng.normal());
  }
  const ParamState s = random_state(T, rng);

  double brute = 0.0;
  for (Scenario k : {Scenario::All, Scenario::Nat})
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t j = 0; j < kMonths; ++j)
        brute += naive_log_binomial(panel.count(k, t, j), ns[t], inv_logit(linear_predictor(s, covs, k, t, j)));
  CHECK(log_likelihood(s, panel, covs) == doctest::Approx(brute).epsilon(1e-12));

  SUBCASE("decomposes over a partition of years") {
    double parts = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<int> a(all.begin() + t * kMonths, all.begin() + (t + 1) * kMonths);
      std::vector<int> b(nat.begin() + t * kMonths, nat.begin() + (t + 1) * kMonths);
      const CountPanel sub({years[t]}, a, b, {ns[t]});
      ParamState st = s;
      st.alpha = {s.alpha[t]};
      st.delta = {s.delta[t]};
      parts += log_likelihood(st, sub, flat_covs(1, covs.x_all[t], covs.x_nat[t]));
    }
    CHECK(std::abs(parts - log_likelihood(s, panel, covs)) < 1e-9);
  }
}

TEST_CASE("cell log likelihood is unimodal at the empirical logit") {
  const int n = 50, z = 7;
  const double mode = logit(static_cast<double>(z) / n);
  double prev = log_binomial_pmf(z, n, mode);
  for (double d = 0.01; d < 6.0; d += 0.01) {
    const double up = log_binomial_pmf(z, n, mode + d);
    const double down = log_binomial_pmf(z, n, mode - d);
    CHECK(up < prev);
    CHECK(down < log_binomial_pmf(z, n, mode - d + 0.01));
    prev = up;
  }
}

TEST_CASE("CountPanel invariants") {
  std::vector<int> ok(kMonths, 1);
  CHECK_NOTHROW(CountPanel({1}, ok, ok, {1}));
  CHECK_THROWS_AS(CountPanel({1}, ok, ok, {0}), ValidationError);
  CHECK_THROWS_AS(CountPanel({}, {}, {}, {}), ValidationError);
  std::vector<int> bad = ok;
  bad[5] = 2;
  CHECK_THROWS_AS(CountPanel({1}, bad, ok, {1}), ValidationError);
  bad[5] = -1;
  CHECK_THROWS_AS(CountPanel({1}, ok, bad, {1}), ValidationError);
  CHECK_THROWS_AS(CountPanel({1}, std::vector<int>(11, 0), ok, {1}), ValidationError);
}

TEST_CASE("covariate standardization") {
  const std::vector<double> a = {13.9, 14.0, 14.2, 14.1, 14.5};
  const std::vector<double> n = {13.8, 13.9, 13.85, 13.9, 13.82};
  const auto c = CovariateSeries::standardize(a, n);
  CHECK(c.standardized);
  CHECK_NOTHROW(c.validate(5));
  for (const auto* x : {&c.x_all, &c.x_nat}) {
    const double m = std::accumulate(x->begin(), x->end(), 0.0) / 5.0;
    double v = 0.0;
    for (double e : *x) v += (e - m) * (e - m);
    CHECK(std::abs(m) < 1e-12);
    CHECK(std::abs(v / 4.0 - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(c.validate(4), ValidationError);
  CovariateSeries broken = c;
  broken.x_all[0] += 0.1;
  CHECK_THROWS_AS(broken.validate(5), ValidationError);
}

TEST_CASE("log prior closed form at the zero state") {
  const std::size_t T = 3;
  ParamState s = ParamState::zeros(T);
  s.tau2 = s.sigma2 = s.omega2 = 1.0;
  PriorConfig prior;
  const double l2pi = std::log(2 * std::numbers::pi);
  const double expected = 2.0 * T * (-0.5 * l2pi)               // alpha, delta
                          - 5.5 * l2pi                          // gamma on the sum-zero plane
                          - 2.0 * std::log(1000.0)              // uniform tau2, sigma2
                          + std::log(2.0 / (std::numbers::pi * 10.0 * (1.0 + 0.01)))  // half-Cauchy(10) at 1
                          + 4.0 * (-0.5 * std::log(2 * std::numbers::pi * 100.0));  // betas
  CHECK(log_prior(s, prior, flat_covs(T)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("log prior support and bound") {
  const std::size_t T = 2;
  ParamState s = ParamState::zeros(T);
  PriorConfig prior;
  const auto covs = flat_covs(T);
  const double ninf = -std::numeric_limits<double>::infinity();
  s.tau2 = 1001.0;
  CHECK(log_prior(s, prior, covs) == ninf);
  s.tau2 = 1.0;
  s.sigma2 = 0.0;
  CHECK(log_prior(s, prior, covs) == ninf);
  s.sigma2 = 1.0;
  s.omega2 = -1.0;
  CHECK(log_prior(s, prior, covs) == ninf);
  s.omega2 = 1.0;

  prior.logit_bound = 10.0;
  s.beta_all.intercept = -10.1;  // max |logit| = L + 0.1
  CHECK(log_prior(s, prior, covs) == ninf);
  s.beta_all.intercept = -9.9;
  CHECK(std::isfinite(log_prior(s, prior, covs)));
  prior.logit_bound.reset();
  s.beta_all.intercept = -50.0;
  CHECK(std::isfinite(log_prior(s, prior, covs)));
}

TEST_CASE("log prior is exchangeable in alpha and in delta") {
  RandomStream rng(5);
  const std::size_t T = 7;
  ParamState s = random_state(T, rng);
  const auto covs = flat_covs(T);
  PriorConfig prior;
  const double base = log_prior(s, prior, covs);
  for (int rep = 0; rep < 20; ++rep) {
    ParamState p = s;
    std::rotate(p.alpha.begin(), p.alpha.begin() + 1 + rep % (T - 1), p.alpha.end());
    CHECK(log_prior(p, prior, covs) == doctest::Approx(base).epsilon(1e-14));
    ParamState q = s;
    std::reverse(q.delta.begin(), q.delta.end());
    std::swap(q.delta[0], q.delta[rep % T]);
    CHECK(log_prior(q, prior, covs) == doctest::Approx(base).epsilon(1e-14));
  }
}

TEST_CASE("gamma prior is unchanged by a constant shift after re-centering") {
  RandomStream rng(8);
  ParamState s = random_state(1, rng);
  const auto covs = flat_covs(1);
  PriorConfig prior;
  const double base = log_prior(s, prior, covs);
  ParamState shifted = s;
  for (auto& g : shifted.gamma) g += 0.7;
  CHECK(log_prior(shifted, prior, covs) == -std::numeric_limits<double>::infinity());
  const double m = std::accumulate(shifted.gamma.begin(), shifted.gamma.end(), 0.0) / kMonths;
  for (auto& g : shifted.gamma) g -= m;
  CHECK(log_prior(shifted, prior, covs) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("check_state") {
  ParamState s = ParamState::zeros(3);
  CHECK_NOTHROW(check_state(s, 3));
  CHECK_THROWS_AS(check_state(s, 4), ValidationError);
  s.gamma[0] = 1e-6;
  CHECK_THROWS_AS(check_state(s, 3), ValidationError);
  s.gamma[0] = 0.0;
  s.omega2 = 0.0;
  CHECK_THROWS_AS(check_state(s, 3), ValidationError);
}

TEST_CASE("prior config validation") {
  PriorConfig p;
  CHECK_NOTHROW(p.validate());
  p.beta_sd = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.logit_bound = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.var_lower = 2.0;
  p.var_upper = 1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}
