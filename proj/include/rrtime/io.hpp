// Readers for region count, covariate and logit-bound tables, and writers for
// fit results. The byte-level formats are described in docs/FORMATS.md.
//
// Input tables are header-driven plain text. Fields are separated by tabs or
// by runs of spaces, may be double-quoted, and a leading unnamed row-name
// column (as written by R's write.table) is tolerated. Numbers are parsed
// with std::from_chars, so the process locale never matters.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrtime/analysis.hpp"
#include "rrtime/model.hpp"
#include "rrtime/sampler.hpp"

namespace rrtime {

/// Input file is absent or unreadable.
class FileNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file content is malformed; the message names the line and column.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An output destination could not be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventType { Hot, Cold, Wet };
const char* to_string(EventType e);
EventType parse_event_type(const std::string& token);

/// A parsed text table. `line_numbers[r]` is the 1-based source line of row r.
struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Column index, or throws ParseError naming `source`.
  std::size_t column(const std::string& name, const std::string& source) const;
  bool has_column(const std::string& name) const;
};

TextTable parse_table(std::istream& in, const std::string& source);

/// Locale-independent number parsing; `where` is prepended to error messages.
double parse_real(const std::string& token, const std::string& where);
long long parse_integer(const std::string& token, const std::string& where);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

struct RegionData {
  CountPanel panel;
  EventType event_type = EventType::Hot;
  std::string source;
  std::size_t rows_in_file = 0;  // all event types
};

RegionData parse_region(std::istream& in, EventType event_type, const std::string& source);
RegionData load_region(const std::filesystem::path& path, EventType event_type);
/// Writes a region file holding `panel` under `event_type` (normative column order).
void write_region(std::ostream& out, const CountPanel& panel, EventType event_type);

struct CovariateData {
  std::vector<int> years;  // empty when the file has no year column
  std::vector<double> raw_all, raw_nat;
  CovariateSeries scaled;
};

CovariateData parse_covariates(std::istream& in, const std::string& source);
CovariateData load_covariates(const std::filesystem::path& path);
void write_covariates(std::ostream& out, const CovariateData& data);
/// Scaled covariates aligned with `years`. With a year column the sets must be
/// identical; without one the row count must equal the number of years.
CovariateSeries covariates_for_years(const CovariateData& data, const std::vector<int>& years);

struct LogitBounds {
  double hot = 0.0;  // lower logit bounds (-L), strictly negative
  double cold = 0.0;
  double wet = 0.0;

  double lower_for(EventType e) const;
};

std::map<std::string, LogitBounds> parse_bounds(std::istream& in, const std::string& source);
std::map<std::string, LogitBounds> load_bounds(const std::filesystem::path& path);

/// Everything a fit writes to its output directory.
struct FitResults {
  std::vector<int> years;
  RiskSeries prob_all, prob_nat, risk_ratio, adjusted_risk_ratio;
  std::vector<PiEstimate> exceedance;
  SigmaSummary sigma;
  QuantileLevels levels;
  double x_star_all = 0.0, x_star_nat = 0.0;
  std::size_t reference_window = 5;
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  std::size_t retained_per_chain = 0;
  std::size_t retained_total = 0;
  std::vector<std::string> block_names;
  std::vector<double> acceptance_rates;
  std::vector<double> proposal_sds;
  std::vector<std::string> tuning_warnings;
  nlohmann::json config;  // run configuration echo
};

inline constexpr const char* kYearlyFile = "yearly.tsv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kLongFile = "risk_long.tsv";
inline constexpr const char* kDrawsFile = "draws.tsv";

void write_yearly_table(std::ostream& out, const FitResults& r);
void write_long_table(std::ostream& out, const FitResults& r);
nlohmann::json summary_record(const FitResults& r);
void write_draws(std::ostream& out, const std::vector<ParamState>& states);
std::vector<std::string> draws_header(std::size_t num_years);

/// Writes yearly.tsv, risk_long.tsv, summary.json and (when `draws` is given)
/// draws.tsv into `dir`. Files are staged under temporary names and renamed
/// only after all of them were written, so a failure leaves no result files.
void write_results(const std::filesystem::path& dir, const FitResults& r,
                   const std::vector<ParamState>* draws = nullptr);

struct YearlyRow {
  int year = 0;
  std::array<double, 12> values{};  // column order of the yearly table
};
std::vector<YearlyRow> read_yearly_table(std::istream& in, const std::string& source);
std::vector<ParamState> read_draws(std::istream& in, const std::string& source);

}  // namespace rrtime
