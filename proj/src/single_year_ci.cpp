#include "rrtime/single_year_ci.hpp"

#include <algorithm>
#include <cmath>

#include "rrtime/model.hpp"
#include "rrtime/stats.hpp"

namespace rrtime {

void StudyInput::validate() const {
  if (!std::isfinite(xi_hat)) throw ValidationError("xi_hat must be finite");
  if (!(sampling_var > 0.0) || !std::isfinite(sampling_var))
    throw ValidationError("sampling variance must be positive");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ValidationError("sigma2 must be non-negative");
  if (!(percentile_p > 0.0 && percentile_p < 1.0)) throw ValidationError("percentile p must lie in (0, 1)");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
}

double StudyInput::total_sd() const { return std::sqrt(sampling_var + sigma2); }

PhiInterval phi_ci(const StudyInput& input) {
  input.validate();
  const double c = normal_quantile(input.percentile_p);
  const double z = normal_quantile(1.0 - 0.5 * (1.0 - input.confidence));
  const double s = input.total_sd();
  PhiInterval out;
  out.lower_multiplier = c - z;
  out.upper_multiplier = c + z;
  out.log_lower = input.xi_hat + out.lower_multiplier * s;
  out.log_upper = input.xi_hat + out.upper_multiplier * s;
  out.ratio_lower = std::exp(out.log_lower);
  out.ratio_upper = std::exp(out.log_upper);
  return out;
}

PhiInterval phi_ci_widened(const StudyInput& input, double sigma2_lower, double sigma2_upper) {
  if (!(sigma2_lower >= 0.0 && sigma2_lower <= sigma2_upper))
    throw ValidationError("sigma2 interval must satisfy 0 <= lower <= upper");
  StudyInput lo = input, hi = input;
  lo.sigma2 = sigma2_lower;
  hi.sigma2 = sigma2_upper;
  const PhiInterval a = phi_ci(lo);
  const PhiInterval b = phi_ci(hi);
  PhiInterval out = a;
  out.log_lower = std::min(a.log_lower, b.log_lower);
  out.log_upper = std::max(a.log_upper, b.log_upper);
  out.ratio_lower = std::exp(out.log_lower);
  out.ratio_upper = std::exp(out.log_upper);
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::RobustAbove1: return "robust_above_1";
    case Verdict::RobustBelow1: return "robust_below_1";
    case Verdict::NotRobust: return "not_robust";
  }
  return "unknown";
}

Verdict robustness_verdict(const StudyInput& input) {
  const double p_low = std::min(input.percentile_p, 1.0 - input.percentile_p);
  StudyInput lower = input;
  lower.percentile_p = p_low;
  if (phi_ci(lower).log_lower > 0.0) return Verdict::RobustAbove1;
  StudyInput upper = input;
  upper.percentile_p = 1.0 - p_low;
  if (phi_ci(upper).log_upper < 0.0) return Verdict::RobustBelow1;
  return Verdict::NotRobust;
}

ThresholdPercentiles threshold_percentiles(double block_length_years, double periods_per_year) {
  if (!(block_length_years > 0.0) || !(periods_per_year > 0.0))
    throw ValidationError("threshold inputs must be positive");
  const double per_period = (1.0 / block_length_years) / periods_per_year;
  return {100.0 * (1.0 - per_period), 100.0 * per_period};
}

}  // namespace rrtime
