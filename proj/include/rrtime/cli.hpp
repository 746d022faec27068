// Command-line front end. Every subcommand is callable in-process and writes
// only to the streams it is given.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rrtime/analysis.hpp"
#include "rrtime/io.hpp"
#include "rrtime/model.hpp"
#include "rrtime/sampler.hpp"
#include "rrtime/single_year_ci.hpp"

namespace rrtime::cli {

/// Process exit statuses. Each validation failure class has its own code.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kUsage = 2,            // bad flags or arguments
  kMissingFile = 3,      // an input file does not exist or cannot be opened
  kRegionError = 4,      // region count file malformed
  kCovariateError = 5,   // covariate file malformed or misaligned
  kBoundsError = 6,      // bounds file malformed or region absent
  kInvalidConfig = 7,    // sampler, prior, cutoff or generator settings invalid
  kOutputError = 8,      // output destination not writable
  kSamplerFailure = 9,   // sampler could not start or failed
};

struct FitOptions {
  std::filesystem::path region_file;
  std::filesystem::path covariate_file;
  std::optional<std::filesystem::path> bounds_file;
  std::string region_id;  // bounds-table key; defaults to the region file stem
  EventType event_type = EventType::Hot;
  std::filesystem::path output_dir;
  PriorConfig prior;
  bool bound_from_flag = false;  // prior.logit_bound was set explicitly
  SamplerConfig sampler;
  std::vector<Cutoff> cutoffs;
  std::size_t reference_window = 5;
  std::optional<double> x_star_all, x_star_nat;
  QuantileLevels levels;
  std::size_t chains = 1;
  bool write_draws = false;
};

/// Default logit bound L when neither a flag nor a bounds table supplies one.
inline constexpr double kDefaultLogitBound = 15.0;

/// Cutoff ladder from a value list; Between consumes values in pairs.
std::vector<Cutoff> make_cutoffs(const std::vector<double>& values, Direction direction);

int cmd_fit(const FitOptions& options, std::ostream& out, std::ostream& err);
/// Loads and checks every input of a fit without sampling.
int cmd_validate(const FitOptions& options, std::ostream& out, std::ostream& err);

struct PhiOptions {
  StudyInput input;
  std::optional<std::pair<double, double>> sigma2_interval;
  bool json = false;
};
int cmd_phi_ci(const PhiOptions& options, std::ostream& out, std::ostream& err);

int cmd_threshold(double block_length_years, double periods_per_year, int decimals, std::ostream& out,
                  std::ostream& err);

struct GenerateOptions {
  std::filesystem::path spec_file;
  std::filesystem::path region_out;
  std::filesystem::path covariates_out;
  std::optional<std::filesystem::path> truth_out;
  std::optional<std::uint64_t> seed;  // overrides the document's seed
};
int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rrtime::cli
