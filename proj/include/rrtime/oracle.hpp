// Reference computations for validating the sampler: forward simulation from
// a known parameter state, brute-force grid posteriors for a reduced model,
// and simulation-based calibration (SBC) replication.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrtime/model.hpp"
#include "rrtime/rng.hpp"
#include "rrtime/sampler.hpp"

namespace rrtime {

struct GeneratorSpec {
  std::vector<int> years;
  std::vector<int> ensemble_sizes;
  ParamState true_state;
  CovariateSeries covariates;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Ensemble sizes with the 50 / 100 / 400 shape of a 15 / 14 / 3 year split,
/// stretched or squeezed onto `num_years` years.
std::vector<int> table_ensemble_schedule(std::size_t num_years);

/// Z[k,t,j] ~ Binomial(n_t, inv_logit(linear predictor)), independently per cell.
CountPanel generate_panel(const GeneratorSpec& spec);

/// Replaces alpha, delta and gamma with draws from their population
/// distributions given the variances already in `state` (gamma re-centred).
void draw_random_effects(ParamState& state, RandomStream& rng);

/// Draws a full state from `prior`; the variance prior must have finite support.
/// With an active logit bound, draws are repeated until every cell is inside it.
ParamState draw_from_prior(const PriorConfig& prior, const CovariateSeries& covs, RandomStream& rng);

/// Normalized posterior density over (beta_A0, beta_N0) with every other
/// parameter held at `fixed`. Row index is the ALL intercept.
struct DensityGrid {
  std::vector<double> axis;     // shared by both intercepts
  std::vector<double> density;  // axis.size()^2, row-major [all][nat]

  double at(std::size_t i_all, std::size_t i_nat) const { return density[i_all * axis.size() + i_nat]; }
  double integral() const;
  std::vector<double> marginal(Scenario k) const;
  double marginal_mean(Scenario k) const;
  /// CDF of the marginal, integrating its piecewise-linear interpolant.
  double marginal_cdf(Scenario k, double x) const;
};

DensityGrid grid_posterior_2d(const CountPanel& panel, const CovariateSeries& covs,
                              const ParamState& fixed, const PriorConfig& prior, double lower,
                              double upper, std::size_t resolution);

struct SbcSetup {
  CovariateSeries covariates;
  int ensemble_size = 50;
  PriorConfig prior;
  SamplerConfig sampler;
  std::size_t replicates = 100;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
};

struct SbcResult {
  std::vector<std::string> parameters;
  std::vector<std::vector<int>> ranks;  // [parameter][replicate]
  int max_rank = 0;                     // number of retained draws per replicate

  const std::vector<int>& ranks_of(const std::string& name) const;
};

/// Parameters tracked by `sbc_run`, in result order.
std::vector<std::string> sbc_parameters();
double sbc_value(const ParamState& s, const std::string& name);

/// Per replicate r: seeds derive_seed(master, 2r) for the truth/data and
/// derive_seed(master, 2r + 1) for the chain.
SbcResult sbc_run(const SbcSetup& setup);

}  // namespace rrtime
