#include "rrtime/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "rrtime/stats.hpp"

namespace rrtime {

namespace {

double mean_inv_logit(double base, const std::array<double, kMonths>& gamma) {
  double s = 0.0;
  for (double g : gamma) s += inv_logit(base + g);
  return s / static_cast<double>(kMonths);
}

double year_base(const ParamState& draw, Scenario k, std::size_t t, double x) {
  const Coefficients& b = draw.beta(k);
  double base = b.intercept + b.slope * x + draw.alpha[t];
  if (k == Scenario::All) base += draw.delta[t];
  return base;
}

RiskSeries summarize(const PosteriorDraws& draws, Quantity quantity, std::span<const int> years,
                     QuantileLevels q,
                     const std::function<std::vector<double>(const ParamState&)>& per_draw) {
  q.validate();
  if (draws.states.empty()) throw std::invalid_argument("no posterior draws to summarize");
  const std::size_t T = years.size();
  std::vector<std::vector<double>> by_year(T, std::vector<double>(draws.states.size()));
  for (std::size_t d = 0; d < draws.states.size(); ++d) {
    const auto v = per_draw(draws.states[d]);
    if (v.size() != T) throw std::invalid_argument("year labels do not match the draws");
    for (std::size_t t = 0; t < T; ++t) by_year[t][d] = v[t];
  }
  RiskSeries out;
  out.quantity = quantity;
  out.years.assign(years.begin(), years.end());
  for (auto& col : by_year) {
    std::sort(col.begin(), col.end());
    out.lower.push_back(quantile_sorted(col, q.lower));
    out.median.push_back(quantile_sorted(col, 0.5));
    out.upper.push_back(quantile_sorted(col, q.upper));
  }
  return out;
}

}  // namespace

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::ProbAll: return "prob_A";
    case Quantity::ProbNat: return "prob_N";
    case Quantity::RiskRatio: return "risk_ratio";
    case Quantity::AdjustedRiskRatio: return "adjusted_risk_ratio";
  }
  return "unknown";
}

void QuantileLevels::validate() const {
  if (!(lower >= 0.0 && lower <= 0.5 && upper >= 0.5 && upper <= 1.0))
    throw ValidationError("quantile levels must satisfy 0 <= lower <= 0.5 <= upper <= 1");
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::Greater: return "greater";
    case Direction::Less: return "less";
    case Direction::Between: return "between";
  }
  return "unknown";
}

Direction parse_direction(const std::string& token) {
  if (token == "greater" || token == ">") return Direction::Greater;
  if (token == "less" || token == "<") return Direction::Less;
  if (token == "between" || token == "<>") return Direction::Between;
  throw ValidationError("unknown direction '" + token + "' (expected greater, less or between)");
}

void Cutoff::validate() const {
  if (!(value > 0.0)) throw ValidationError("cutoff must be positive");
  if (direction == Direction::Between && !(upper_value > value))
    throw ValidationError("between-cutoffs must be given in increasing order");
}

bool Cutoff::satisfied_by(double rr) const {
  switch (direction) {
    case Direction::Greater: return rr > value;
    case Direction::Less: return rr < value;
    case Direction::Between: return rr > value && rr < upper_value;
  }
  return false;
}

std::string Cutoff::label() const {
  std::ostringstream os;
  os.precision(17);
  switch (direction) {
    case Direction::Greater: os << "RR>" << value; break;
    case Direction::Less: os << "RR<" << value; break;
    case Direction::Between: os << value << "<RR<" << upper_value; break;
  }
  return os.str();
}

std::vector<double> yearly_probabilities(const ParamState& draw, const CovariateSeries& covs, Scenario k) {
  const std::size_t T = draw.num_years();
  if (covs.num_years() != T) throw std::invalid_argument("covariates do not match the draw");
  std::vector<double> p(T);
  for (std::size_t t = 0; t < T; ++t) p[t] = mean_inv_logit(year_base(draw, k, t, covs.of(k)[t]), draw.gamma);
  return p;
}

std::vector<double> yearly_probabilities_at(const ParamState& draw, Scenario k, double x_fixed) {
  std::vector<double> p(draw.num_years());
  for (std::size_t t = 0; t < p.size(); ++t) p[t] = mean_inv_logit(year_base(draw, k, t, x_fixed), draw.gamma);
  return p;
}

std::vector<double> risk_ratio(const ParamState& draw, const CovariateSeries& covs) {
  auto pa = yearly_probabilities(draw, covs, Scenario::All);
  const auto pn = yearly_probabilities(draw, covs, Scenario::Nat);
  for (std::size_t t = 0; t < pa.size(); ++t) pa[t] /= pn[t];
  return pa;
}

ApproxRiskRatio approx_rr_decomposition(const ParamState& draw, const CovariateSeries& covs) {
  const std::size_t T = draw.num_years();
  ApproxRiskRatio r;
  r.baseline = std::exp(draw.beta_all.intercept - draw.beta_nat.intercept);
  for (std::size_t t = 0; t < T; ++t) {
    r.covariate_scale.push_back(
        std::exp(draw.beta_all.slope * covs.x_all.at(t) - draw.beta_nat.slope * covs.x_nat.at(t)));
    r.year_factor.push_back(std::exp(draw.delta[t]));
    r.product.push_back(r.baseline * r.covariate_scale.back() * r.year_factor.back());
  }
  return r;
}

std::vector<double> adjusted_risk_ratio(const ParamState& draw, double x_star_all, double x_star_nat) {
  auto pa = yearly_probabilities_at(draw, Scenario::All, x_star_all);
  const auto pn = yearly_probabilities_at(draw, Scenario::Nat, x_star_nat);
  for (std::size_t t = 0; t < pa.size(); ++t) pa[t] /= pn[t];
  return pa;
}

std::pair<double, double> reference_covariates(const CovariateSeries& covs, std::size_t window) {
  const std::size_t T = covs.num_years();
  if (window == 0 || window > T) throw ValidationError("reference window must lie in [1, T]");
  auto tail_mean = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t t = T - window; t < T; ++t) s += x[t];
    return s / static_cast<double>(window);
  };
  return {tail_mean(covs.x_all), tail_mean(covs.x_nat)};
}

RiskSeries summarize_probabilities(const PosteriorDraws& draws, const CovariateSeries& covs,
                                   Scenario k, std::span<const int> years, QuantileLevels q) {
  return summarize(draws, k == Scenario::All ? Quantity::ProbAll : Quantity::ProbNat, years, q,
                   [&](const ParamState& s) { return yearly_probabilities(s, covs, k); });
}

RiskSeries summarize_risk_ratio(const PosteriorDraws& draws, const CovariateSeries& covs,
                                std::span<const int> years, QuantileLevels q) {
  return summarize(draws, Quantity::RiskRatio, years, q,
                   [&](const ParamState& s) { return risk_ratio(s, covs); });
}

RiskSeries summarize_adjusted_risk_ratio(const PosteriorDraws& draws, double x_star_all,
                                         double x_star_nat, std::span<const int> years,
                                         QuantileLevels q) {
  return summarize(draws, Quantity::AdjustedRiskRatio, years, q, [&](const ParamState& s) {
    return adjusted_risk_ratio(s, x_star_all, x_star_nat);
  });
}

double exceedance_fraction(const ParamState& draw, double x_star_all, double x_star_nat,
                           const Cutoff& cutoff) {
  const auto rr = adjusted_risk_ratio(draw, x_star_all, x_star_nat);
  const auto hits = std::count_if(rr.begin(), rr.end(), [&](double v) { return cutoff.satisfied_by(v); });
  return static_cast<double>(hits) / static_cast<double>(rr.size());
}

PiEstimate exceedance_pi(const PosteriorDraws& draws, double x_star_all, double x_star_nat,
                         const Cutoff& cutoff, QuantileLevels q) {
  cutoff.validate();
  q.validate();
  if (draws.states.empty()) throw std::invalid_argument("no posterior draws");
  std::vector<double> fractions;
  fractions.reserve(draws.states.size());
  for (const auto& s : draws.states) fractions.push_back(exceedance_fraction(s, x_star_all, x_star_nat, cutoff));
  std::sort(fractions.begin(), fractions.end());
  PiEstimate pi;
  pi.cutoff = cutoff;
  pi.lower = quantile_sorted(fractions, q.lower);
  pi.median = quantile_sorted(fractions, 0.5);
  pi.upper = quantile_sorted(fractions, q.upper);
  pi.category = classify(pi.lower, pi.upper);
  return pi;
}

Category classify(double pi_lower, double pi_upper) {
  if (!(pi_lower >= 0.0 && pi_lower <= pi_upper && pi_upper <= 1.0))
    throw std::invalid_argument("classify: need 0 <= lower <= upper <= 1");
  if (pi_upper < 0.05 || pi_lower > 0.95) return Category::Stable;
  if (pi_lower >= 0.05 && pi_upper <= 0.95) return Category::Varies;
  return Category::Inconclusive;
}

SigmaSummary sigma_summary(const PosteriorDraws& draws, QuantileLevels q) {
  q.validate();
  if (draws.states.empty()) throw std::invalid_argument("no posterior draws");
  std::vector<double> sigma;
  sigma.reserve(draws.states.size());
  for (const auto& s : draws.states) sigma.push_back(std::sqrt(s.sigma2));
  std::sort(sigma.begin(), sigma.end());
  return {quantile_sorted(sigma, 0.5), quantile_sorted(sigma, q.lower), quantile_sorted(sigma, q.upper)};
}

}  // namespace rrtime
