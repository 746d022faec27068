// Small numerical helpers shared by the analysis, oracle and test code.
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rrtime {

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `values` need not be sorted. Throws on empty input.
double quantile(std::span<const double> values, double prob);
/// Same as `quantile` but for an already ascending-sorted range.
double quantile_sorted(std::span<const double> sorted, double prob);

double mean(std::span<const double> values);
/// Sample variance (n - 1 denominator).
double sample_variance(std::span<const double> values);

/// Standard normal quantile (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double p);
double normal_cdf(double x);

/// Upper tail probability of a chi-squared statistic with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

/// Pearson chi-squared test that integer ranks in [0, max_rank] are uniform,
/// pooled into `bins` equal-width bins. Requires (max_rank + 1) % bins == 0.
double rank_uniformity_pvalue(std::span<const int> ranks, int max_rank, int bins);

/// sup_x |F_n(x) - cdf(x)| for the empirical distribution of `sample`.
double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf);

}  // namespace rrtime
