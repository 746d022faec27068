#include "rrtime/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <system_error>
#include <tuple>

namespace rrtime {

namespace {

const std::array<const char*, kMonths> kMonthNames = {"january", "february", "march",     "april",
                                                      "may",     "june",     "july",      "august",
                                                      "september", "october", "november", "december"};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Splits one line. Tab mode keeps empty fields; space mode collapses runs.
std::vector<std::string> split_fields(const std::string& line, bool tab_mode, const std::string& where) {
  std::vector<std::string> out;
  std::string field;
  bool in_quotes = false, quoted = false, have_field = false;
  auto flush = [&] {
    out.push_back(quoted ? field : trim(field));
    field.clear();
    quoted = false;
    have_field = false;
  };
  for (char c : line) {
    if (in_quotes) {
      if (c == '"') in_quotes = false;
      else field += c;
      continue;
    }
    if (c == '"') {
      in_quotes = quoted = have_field = true;
      continue;
    }
    const bool sep = tab_mode ? c == '\t' : (c == ' ' || c == '\t');
    if (sep) {
      if (tab_mode || have_field) flush();
      continue;
    }
    field += c;
    have_field = true;
  }
  if (in_quotes) throw ParseError(where + ": unterminated quote");
  if (tab_mode || have_field) flush();
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw FileNotFound("input file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open input file: " + path.string());
  return in;
}

std::string where(const std::string& source, std::size_t line, const std::string& column) {
  return source + ":" + std::to_string(line) + ", column '" + column + "'";
}

}  // namespace

const char* to_string(EventType e) {
  switch (e) {
    case EventType::Hot: return "hot";
    case EventType::Cold: return "cold";
    case EventType::Wet: return "wet";
  }
  return "unknown";
}

EventType parse_event_type(const std::string& token) {
  const std::string t = lower(token);
  if (t == "hot") return EventType::Hot;
  if (t == "cold") return EventType::Cold;
  if (t == "wet") return EventType::Wet;
  throw ParseError("unknown event_type '" + token + "' (expected hot, cold or wet)");
}

std::size_t TextTable::column(const std::string& name, const std::string& source) const {
  const auto it = std::find(header.begin(), header.end(), lower(name));
  if (it == header.end()) throw ParseError(source + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool TextTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), lower(name)) != header.end();
}

TextTable parse_table(std::istream& in, const std::string& source) {
  TextTable table;
  std::string line;
  std::size_t line_no = 0;
  bool tab_mode = false, have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::string loc = source + ":" + std::to_string(line_no);
    if (!have_header) {
      tab_mode = line.find('\t') != std::string::npos;
      for (auto& h : split_fields(line, tab_mode, loc)) table.header.push_back(lower(h));
      // A leading empty name is R's row-name column header.
      if (!table.header.empty() && table.header.front().empty()) table.header.erase(table.header.begin());
      std::set<std::string> seen;
      for (const auto& h : table.header) {
        if (h.empty()) throw ParseError(loc + ": empty column name in header");
        if (!seen.insert(h).second) throw ParseError(loc + ": duplicate column '" + h + "'");
      }
      have_header = true;
      continue;
    }
    auto fields = split_fields(line, tab_mode, loc);
    if (fields.size() == table.header.size() + 1) fields.erase(fields.begin());
    if (fields.size() != table.header.size())
      throw ParseError(loc + ": expected " + std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ParseError(source + ": empty file (no header row)");
  return table;
}

double parse_real(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  if (t.find(',') != std::string::npos)
    throw ParseError(where + ": '" + t + "' uses a comma; only '.' is accepted as decimal point");
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ParseError(where + ": '" + t + "' is not a finite number");
  return v;
}

long long parse_integer(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  long long v = 0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    // Integral values written as reals (e.g. "12.0") are accepted.
    const double d = parse_real(t, where);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) throw ParseError(where + ": '" + t + "' is not an integer");
    return static_cast<long long>(d);
  }
  return v;
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

RegionData parse_region(std::istream& in, EventType event_type, const std::string& source) {
  const TextTable table = parse_table(in, source);
  if (table.rows.empty()) throw ParseError(source + ": no data rows");
  std::array<std::size_t, kMonths> month_col{};
  for (std::size_t j = 0; j < kMonths; ++j) month_col[j] = table.column(kMonthNames[j], source);
  const std::size_t c_event = table.column("event_type", source);
  const std::size_t c_scen = table.column("scenario", source);
  const std::size_t c_year = table.column("year", source);
  const std::size_t c_n = table.column("n_sims", source);

  struct Row {
    int n;
    std::array<int, kMonths> z;
    std::size_t line;
  };
  std::map<int, Row> rows_all, rows_nat;
  std::map<std::tuple<int, int, int>, std::size_t> seen;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    EventType ev;
    try {
      ev = parse_event_type(f[c_event]);
    } catch (const ParseError& e) {
      throw ParseError(where(source, line, "event_type") + ": " + e.what());
    }
    const std::string scen = lower(f[c_scen]);
    if (scen != "all" && scen != "nat")
      throw ParseError(where(source, line, "scenario") + ": unknown scenario '" + f[c_scen] +
                       "' (expected ALL or NAT)");
    const Scenario k = scen == "all" ? Scenario::All : Scenario::Nat;
    const long long year = parse_integer(f[c_year], where(source, line, "year"));
    const long long n = parse_integer(f[c_n], where(source, line, "n_sims"));
    if (n < 1 || n > 1000000000) throw ParseError(where(source, line, "n_sims") + ": must be >= 1");
    if (year < -1000000 || year > 1000000) throw ParseError(where(source, line, "year") + ": out of range");

    const auto key = std::make_tuple(static_cast<int>(ev), static_cast<int>(k), static_cast<int>(year));
    if (const auto [it, fresh] = seen.emplace(key, line); !fresh)
      throw ParseError(source + ":" + std::to_string(line) + ": duplicate row for (" + to_string(ev) + ", " +
                       (k == Scenario::All ? "ALL" : "NAT") + ", " + std::to_string(year) +
                       "), first seen on line " + std::to_string(it->second));

    Row row{static_cast<int>(n), {}, line};
    for (std::size_t j = 0; j < kMonths; ++j) {
      const std::string w = where(source, line, kMonthNames[j]);
      const long long z = parse_integer(f[month_col[j]], w);
      if (z < 0) throw ParseError(w + ": negative count " + std::to_string(z));
      if (z > n)
        throw ParseError(w + ": count " + std::to_string(z) + " exceeds n_sims " + std::to_string(n));
      row.z[j] = static_cast<int>(z);
    }
    if (ev == event_type) (k == Scenario::All ? rows_all : rows_nat).emplace(static_cast<int>(year), row);
  }

  if (rows_all.empty() && rows_nat.empty())
    throw ParseError(source + ": no rows with event_type " + to_string(event_type));
  std::set<int> years;
  for (const auto& [y, _] : rows_all) years.insert(y);
  for (const auto& [y, _] : rows_nat) years.insert(y);
  std::vector<int> ys(years.begin(), years.end());
  std::vector<int> all, nat, ns;
  for (std::size_t t = 0; t < ys.size(); ++t) {
    const int y = ys[t];
    if (t > 0 && y != ys[t - 1] + 1)
      throw ParseError(source + ": years " + std::to_string(ys[t - 1]) + " and " + std::to_string(y) +
                       " are not consecutive (missing years are not allowed)");
    const auto a = rows_all.find(y);
    const auto b = rows_nat.find(y);
    if (a == rows_all.end()) throw ParseError(source + ": year " + std::to_string(y) + " has no ALL row");
    if (b == rows_nat.end()) throw ParseError(source + ": year " + std::to_string(y) + " has no NAT row");
    if (a->second.n != b->second.n)
      throw ParseError(source + ": year " + std::to_string(y) + " has n_sims " + std::to_string(a->second.n) +
                       " (line " + std::to_string(a->second.line) + ") for ALL but " +
                       std::to_string(b->second.n) + " (line " + std::to_string(b->second.line) + ") for NAT");
    all.insert(all.end(), a->second.z.begin(), a->second.z.end());
    nat.insert(nat.end(), b->second.z.begin(), b->second.z.end());
    ns.push_back(a->second.n);
  }
  RegionData out;
  out.panel = CountPanel(std::move(ys), std::move(all), std::move(nat), std::move(ns));
  out.event_type = event_type;
  out.source = source;
  out.rows_in_file = table.rows.size();
  return out;
}

RegionData load_region(const std::filesystem::path& path, EventType event_type) {
  auto in = open_input(path);
  return parse_region(in, event_type, path.string());
}

void write_region(std::ostream& out, const CountPanel& panel, EventType event_type) {
  for (const char* m : kMonthNames) out << m << '\t';
  out << "event_type\tscenario\tyear\tn_sims\n";
  for (std::size_t t = 0; t < panel.num_years(); ++t) {
    for (Scenario k : {Scenario::All, Scenario::Nat}) {
      for (std::size_t j = 0; j < kMonths; ++j) out << panel.count(k, t, j) << '\t';
      out << to_string(event_type) << '\t' << (k == Scenario::All ? "ALL" : "NAT") << '\t' << panel.years()[t]
          << '\t' << panel.ensemble_size(t) << '\n';
    }
  }
}

CovariateData parse_covariates(std::istream& in, const std::string& source) {
  const TextTable table = parse_table(in, source);
  if (table.rows.empty()) throw ParseError(source + ": no data rows");
  const std::size_t c_ar = table.column("gmtA_raw", source);
  const std::size_t c_a = table.column("gmtA", source);
  const std::size_t c_nr = table.column("gmtN_raw", source);
  const std::size_t c_n = table.column("gmtN", source);
  const bool has_year = table.has_column("year");
  CovariateData d;
  d.scaled.standardized = true;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    d.raw_all.push_back(parse_real(f[c_ar], where(source, line, "gmtA_raw")));
    d.scaled.x_all.push_back(parse_real(f[c_a], where(source, line, "gmtA")));
    d.raw_nat.push_back(parse_real(f[c_nr], where(source, line, "gmtN_raw")));
    d.scaled.x_nat.push_back(parse_real(f[c_n], where(source, line, "gmtN")));
    if (has_year) {
      const std::size_t c_y = table.column("year", source);
      d.years.push_back(static_cast<int>(parse_integer(f[c_y], where(source, line, "year"))));
    }
  }
  if (has_year) {
    std::set<int> uniq(d.years.begin(), d.years.end());
    if (uniq.size() != d.years.size()) throw ParseError(source + ": duplicate year rows");
  }
  try {
    d.scaled.validate(d.scaled.x_all.size());
  } catch (const ValidationError& e) {
    throw ParseError(source + ": " + e.what());
  }
  return d;
}

CovariateData load_covariates(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_covariates(in, path.string());
}

void write_covariates(std::ostream& out, const CovariateData& d) {
  const bool with_year = !d.years.empty();
  if (with_year) out << "year\t";
  out << "gmtA_raw\tgmtA\tgmtN_raw\tgmtN\n";
  for (std::size_t t = 0; t < d.scaled.x_all.size(); ++t) {
    if (with_year) out << d.years[t] << '\t';
    out << format_real(d.raw_all[t]) << '\t' << format_real(d.scaled.x_all[t]) << '\t'
        << format_real(d.raw_nat[t]) << '\t' << format_real(d.scaled.x_nat[t]) << '\n';
  }
}

CovariateSeries covariates_for_years(const CovariateData& data, const std::vector<int>& years) {
  const std::size_t rows = data.scaled.x_all.size();
  if (data.years.empty()) {
    if (rows != years.size())
      throw ValidationError("covariate file has " + std::to_string(rows) + " rows but the region has " +
                            std::to_string(years.size()) + " years");
    return data.scaled;
  }
  std::vector<int> sorted = data.years;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != years)
    throw ValidationError("covariate years do not match the region years " + std::to_string(years.front()) +
                          ".." + std::to_string(years.back()));
  CovariateSeries out;
  out.standardized = data.scaled.standardized;
  for (int y : years) {
    const auto t = static_cast<std::size_t>(std::find(data.years.begin(), data.years.end(), y) - data.years.begin());
    out.x_all.push_back(data.scaled.x_all[t]);
    out.x_nat.push_back(data.scaled.x_nat[t]);
  }
  return out;
}

double LogitBounds::lower_for(EventType e) const {
  switch (e) {
    case EventType::Hot: return hot;
    case EventType::Cold: return cold;
    case EventType::Wet: return wet;
  }
  return 0.0;
}

std::map<std::string, LogitBounds> parse_bounds(std::istream& in, const std::string& source) {
  const TextTable table = parse_table(in, source);
  if (table.rows.empty()) throw ParseError(source + ": no data rows");
  const std::size_t c_region = table.column("region", source);
  const std::array<std::pair<const char*, double LogitBounds::*>, 3> cols = {
      {{"hot_limits", &LogitBounds::hot}, {"cold_limits", &LogitBounds::cold}, {"wet_limits", &LogitBounds::wet}}};
  std::array<std::size_t, 3> idx{};
  for (std::size_t c = 0; c < 3; ++c) idx[c] = table.column(cols[c].first, source);
  std::map<std::string, LogitBounds> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    LogitBounds b;
    for (std::size_t c = 0; c < 3; ++c) {
      const std::string w = where(source, line, cols[c].first);
      const double v = parse_real(f[idx[c]], w);
      if (!(v < 0.0)) throw ParseError(w + ": lower logit bound must be strictly negative, got " + f[idx[c]]);
      b.*cols[c].second = v;
    }
    if (!out.emplace(f[c_region], b).second)
      throw ParseError(where(source, line, "region") + ": duplicate region '" + f[c_region] + "'");
  }
  return out;
}

std::map<std::string, LogitBounds> load_bounds(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_bounds(in, path.string());
}

void write_yearly_table(std::ostream& out, const FitResults& r) {
  out << "year";
  for (const char* q : {"p_A", "p_N", "RR", "RR_adj"})
    for (const char* s : {"median", "lower", "upper"}) out << '\t' << q << '_' << s;
  out << '\n';
  for (std::size_t t = 0; t < r.years.size(); ++t) {
    out << r.years[t];
    for (const RiskSeries* s : {&r.prob_all, &r.prob_nat, &r.risk_ratio, &r.adjusted_risk_ratio})
      out << '\t' << format_real(s->median.at(t)) << '\t' << format_real(s->lower.at(t)) << '\t'
          << format_real(s->upper.at(t));
    out << '\n';
  }
}

void write_long_table(std::ostream& out, const FitResults& r) {
  out << "year\tquantity\tmedian\tlower\tupper\n";
  for (const RiskSeries* s : {&r.prob_all, &r.prob_nat, &r.risk_ratio, &r.adjusted_risk_ratio})
    for (std::size_t t = 0; t < r.years.size(); ++t)
      out << r.years[t] << '\t' << to_string(s->quantity) << '\t' << format_real(s->median.at(t)) << '\t'
          << format_real(s->lower.at(t)) << '\t' << format_real(s->upper.at(t)) << '\n';
}

nlohmann::json summary_record(const FitResults& r) {
  using nlohmann::json;
  json j;
  j["format"] = "rrtime-summary";
  j["format_version"] = 1;
  j["seed"] = r.seed;
  j["chains"] = r.chains;
  j["retained_per_chain"] = r.retained_per_chain;
  j["retained_draws"] = r.retained_total;
  j["num_years"] = r.years.size();
  j["years"] = r.years;
  j["quantile_levels"] = {{"lower", r.levels.lower}, {"upper", r.levels.upper}};
  j["sigma"] = {{"median", r.sigma.median}, {"lower", r.sigma.lower}, {"upper", r.sigma.upper}};
  j["reference_covariates"] = {{"x_all", r.x_star_all}, {"x_nat", r.x_star_nat}, {"window", r.reference_window}};
  json ex = json::array();
  for (const auto& p : r.exceedance) {
    json e = {{"label", p.cutoff.label()},
              {"direction", to_string(p.cutoff.direction)},
              {"cutoff", p.cutoff.value},
              {"pi_median", p.median},
              {"pi_lower", p.lower},
              {"pi_upper", p.upper},
              {"category", static_cast<int>(p.category)}};
    if (p.cutoff.direction == Direction::Between) e["cutoff_upper"] = p.cutoff.upper_value;
    ex.push_back(std::move(e));
  }
  j["exceedance"] = std::move(ex);
  json acc = json::object(), sds = json::object();
  for (std::size_t b = 0; b < r.block_names.size(); ++b) {
    acc[r.block_names[b]] = r.acceptance_rates.at(b);
    sds[r.block_names[b]] = r.proposal_sds.at(b);
  }
  j["acceptance_rates"] = std::move(acc);
  j["proposal_sds"] = std::move(sds);
  j["tuning_warnings"] = r.tuning_warnings;
  j["config"] = r.config.is_null() ? json::object() : r.config;
  return j;
}

std::vector<std::string> draws_header(std::size_t num_years) {
  std::vector<std::string> h;
  for (std::size_t t = 1; t <= num_years; ++t) h.push_back("alpha_" + std::to_string(t));
  for (std::size_t t = 1; t <= num_years; ++t) h.push_back("delta_" + std::to_string(t));
  for (std::size_t j = 1; j <= kMonths; ++j) h.push_back("gamma_" + std::to_string(j));
  for (const char* n : {"beta_A0", "beta_A1", "beta_N0", "beta_N1", "tau2", "sigma2", "omega2"}) h.emplace_back(n);
  return h;
}

void write_draws(std::ostream& out, const std::vector<ParamState>& states) {
  const std::size_t T = states.empty() ? 0 : states.front().num_years();
  const auto h = draws_header(T);
  for (std::size_t c = 0; c < h.size(); ++c) out << (c ? "\t" : "") << h[c];
  out << '\n';
  for (const auto& s : states) {
    std::vector<double> v;
    v.insert(v.end(), s.alpha.begin(), s.alpha.end());
    v.insert(v.end(), s.delta.begin(), s.delta.end());
    v.insert(v.end(), s.gamma.begin(), s.gamma.end());
    for (double x : {s.beta_all.intercept, s.beta_all.slope, s.beta_nat.intercept, s.beta_nat.slope, s.tau2,
                     s.sigma2, s.omega2})
      v.push_back(x);
    for (std::size_t c = 0; c < v.size(); ++c) out << (c ? "\t" : "") << format_real(v[c]);
    out << '\n';
  }
}

void write_results(const std::filesystem::path& dir, const FitResults& r, const std::vector<ParamState>* draws) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());

  std::vector<std::pair<std::string, std::string>> files;
  {
    std::ostringstream os;
    write_yearly_table(os, r);
    files.emplace_back(kYearlyFile, os.str());
  }
  {
    std::ostringstream os;
    write_long_table(os, r);
    files.emplace_back(kLongFile, os.str());
  }
  files.emplace_back(kSummaryFile, summary_record(r).dump(2) + "\n");
  if (draws) {
    std::ostringstream os;
    write_draws(os, *draws);
    files.emplace_back(kDrawsFile, os.str());
  }

  std::vector<fs::path> staged;
  auto cleanup = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, body] : files) {
    const fs::path tmp = dir / ("." + name + ".tmp");
    staged.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << body;
    out.close();
    if (!out) {
      cleanup();
      throw OutputError("cannot write " + (dir / name).string());
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(staged[i], dir / files[i].first, ec);
    if (ec) {
      cleanup();
      throw OutputError("cannot write " + (dir / files[i].first).string() + ": " + ec.message());
    }
  }
}

std::vector<YearlyRow> read_yearly_table(std::istream& in, const std::string& source) {
  const TextTable table = parse_table(in, source);
  if (table.header.size() != 13) throw ParseError(source + ": expected 13 columns in the yearly table");
  std::vector<YearlyRow> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    YearlyRow row;
    const std::size_t line = table.line_numbers[r];
    row.year = static_cast<int>(parse_integer(table.rows[r][0], where(source, line, "year")));
    for (std::size_t c = 0; c < 12; ++c)
      row.values[c] = parse_real(table.rows[r][c + 1], where(source, line, table.header[c + 1]));
    out.push_back(row);
  }
  return out;
}

std::vector<ParamState> read_draws(std::istream& in, const std::string& source) {
  const TextTable table = parse_table(in, source);
  const std::size_t extra = kMonths + 7;
  if (table.header.size() < extra + 2 || (table.header.size() - extra) % 2 != 0)
    throw ParseError(source + ": unexpected column count in draws table");
  const std::size_t T = (table.header.size() - extra) / 2;
  const auto expected = draws_header(T);
  for (std::size_t c = 0; c < expected.size(); ++c)
    if (table.header[c] != lower(expected[c]))
      throw ParseError(source + ": column " + std::to_string(c + 1) + " should be '" + expected[c] + "'");
  std::vector<ParamState> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<double> v;
    for (std::size_t c = 0; c < expected.size(); ++c)
      v.push_back(parse_real(table.rows[r][c], where(source, table.line_numbers[r], expected[c])));
    ParamState s = ParamState::zeros(T);
    std::size_t i = 0;
    for (std::size_t t = 0; t < T; ++t) s.alpha[t] = v[i++];
    for (std::size_t t = 0; t < T; ++t) s.delta[t] = v[i++];
    for (std::size_t j = 0; j < kMonths; ++j) s.gamma[j] = v[i++];
    s.beta_all = {v[i], v[i + 1]};
    s.beta_nat = {v[i + 2], v[i + 3]};
    s.tau2 = v[i + 4];
    s.sigma2 = v[i + 5];
    s.omega2 = v[i + 6];
    out.push_back(s);
  }
  return out;
}

}  // namespace rrtime
