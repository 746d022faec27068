// Confidence intervals for a percentile of the population (all-years)
// distribution of the log risk ratio, given a single-year estimate and an
// external estimate of the interannual variance sigma2.
//
// With xi_hat ~ N(mu, v + sigma2), v = nu^2/n, the interval for
// phi_p = mu + c_p * s, s = sqrt(v + sigma2), is
//   xi_hat + (c_p -/+ z_{alpha/2}) * s.
#pragma once

namespace rrtime {

struct StudyInput {
  double xi_hat = 0.0;        // log risk ratio estimate
  double sampling_var = 0.0;  // nu^2 / n
  double sigma2 = 0.0;        // interannual variance
  double percentile_p = 0.05;
  double confidence = 0.95;

  void validate() const;
  double total_sd() const;
};

struct PhiInterval {
  double log_lower = 0.0;
  double log_upper = 0.0;
  double ratio_lower = 0.0;  // exp(log_lower)
  double ratio_upper = 0.0;
  double lower_multiplier = 0.0;  // c_p - z
  double upper_multiplier = 0.0;  // c_p + z
};

PhiInterval phi_ci(const StudyInput& input);

/// Heuristic (not part of the known-variance derivation): evaluates the interval
/// at both ends of a sigma2 credible interval and takes the outer envelope.
PhiInterval phi_ci_widened(const StudyInput& input, double sigma2_lower, double sigma2_upper);

enum class Verdict { RobustAbove1, RobustBelow1, NotRobust };
const char* to_string(Verdict v);

/// RobustAbove1 if the interval for phi_p lies above 0, RobustBelow1 if the
/// interval for phi_{1-p} lies below 0, otherwise NotRobust.
Verdict robustness_verdict(const StudyInput& input);

/// Monthly-data percentile pair for a one-in-`block_length_years` event:
/// (100 (1 - (1/block)/months), 100 (1/block)/months).
struct ThresholdPercentiles {
  double upper = 0.0;
  double lower = 0.0;
};
ThresholdPercentiles threshold_percentiles(double block_length_years = 10.0, double periods_per_year = 12.0);

}  // namespace rrtime
