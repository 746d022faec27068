// Posterior summaries: yearly probabilities, risk ratios (exact, approximate,
// covariate-adjusted), the year-fraction exceedance diagnostic and sigma.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rrtime/model.hpp"
#include "rrtime/sampler.hpp"

namespace rrtime {

enum class Quantity { ProbAll, ProbNat, RiskRatio, AdjustedRiskRatio };
const char* to_string(Quantity q);

struct QuantileLevels {
  double lower = 0.025;
  double upper = 0.975;

  void validate() const;
};

/// Per-year posterior median and credible bounds of one quantity.
struct RiskSeries {
  Quantity quantity = Quantity::ProbAll;
  std::vector<int> years;
  std::vector<double> median;
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class Direction { Greater, Less, Between };
const char* to_string(Direction d);
Direction parse_direction(const std::string& token);

struct Cutoff {
  Direction direction = Direction::Greater;
  double value = 1.0;        // the cutoff, or the lower edge for Between
  double upper_value = 0.0;  // only used for Between

  void validate() const;
  bool satisfied_by(double risk_ratio) const;
  std::string label() const;
};

/// Three-way robustness category: 1 = conclusions vary over years,
/// 2 = inconclusive, 3 = conclusions do not vary.
enum class Category { Varies = 1, Inconclusive = 2, Stable = 3 };

struct PiEstimate {
  Cutoff cutoff;
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
  Category category = Category::Inconclusive;
};

struct SigmaSummary {
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct ApproxRiskRatio {
  double baseline = 1.0;              // exp(beta_A0 - beta_N0)
  std::vector<double> covariate_scale;  // exp(beta_A1 x_At - beta_N1 x_Nt)
  std::vector<double> year_factor;      // exp(delta_t)
  std::vector<double> product;
};

std::vector<double> yearly_probabilities(const ParamState& draw, const CovariateSeries& covs, Scenario k);
/// Yearly probabilities with the covariate replaced by `x_fixed` in every year.
std::vector<double> yearly_probabilities_at(const ParamState& draw, Scenario k, double x_fixed);

std::vector<double> risk_ratio(const ParamState& draw, const CovariateSeries& covs);
ApproxRiskRatio approx_rr_decomposition(const ParamState& draw, const CovariateSeries& covs);
std::vector<double> adjusted_risk_ratio(const ParamState& draw, double x_star_all, double x_star_nat);

/// Mean of the last `window` years of each covariate series.
std::pair<double, double> reference_covariates(const CovariateSeries& covs, std::size_t window = 5);

RiskSeries summarize_probabilities(const PosteriorDraws& draws, const CovariateSeries& covs,
                                   Scenario k, std::span<const int> years, QuantileLevels q = {});
RiskSeries summarize_risk_ratio(const PosteriorDraws& draws, const CovariateSeries& covs,
                                std::span<const int> years, QuantileLevels q = {});
RiskSeries summarize_adjusted_risk_ratio(const PosteriorDraws& draws, double x_star_all,
                                         double x_star_nat, std::span<const int> years,
                                         QuantileLevels q = {});

/// Fraction of years in one draw whose adjusted risk ratio satisfies the cutoff.
double exceedance_fraction(const ParamState& draw, double x_star_all, double x_star_nat,
                           const Cutoff& cutoff);
PiEstimate exceedance_pi(const PosteriorDraws& draws, double x_star_all, double x_star_nat,
                         const Cutoff& cutoff, QuantileLevels q = {});

Category classify(double pi_lower, double pi_upper);

SigmaSummary sigma_summary(const PosteriorDraws& draws, QuantileLevels q = {});

}  // namespace rrtime
