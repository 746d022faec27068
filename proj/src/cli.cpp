#include "rrtime/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrtime/oracle.hpp"
#include "rrtime/rng.hpp"

namespace rrtime::cli {

namespace {

using nlohmann::json;

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Raised inside cmd_* helpers to leave with a specific status.
struct Failure {
  int code;
  std::string message;
};

const char* step_name(BetaSufficientStep s) {
  switch (s) {
    case BetaSufficientStep::ExactConditional: return "exact";
    case BetaSufficientStep::IndependentMarginal: return "independent";
    case BetaSufficientStep::Skip: return "skip";
  }
  return "exact";
}

json config_echo(const FitOptions& o, const std::string& region_id, const PriorConfig& prior) {
  const SamplerConfig& s = o.sampler;
  json cut = json::array();
  for (const auto& c : o.cutoffs) cut.push_back(c.label());
  return {
      {"region_file", o.region_file.filename().string()},
      {"covariate_file", o.covariate_file.filename().string()},
      {"bounds_file", o.bounds_file ? json(o.bounds_file->filename().string()) : json(nullptr)},
      {"region", region_id},
      {"event_type", to_string(o.event_type)},
      {"chains", o.chains},
      {"cutoffs", cut},
      {"write_draws", o.write_draws},
      {"sampler",
       {{"iterations", s.iterations},
        {"burn_in", s.burn_in},
        {"thin", s.thin},
        {"tune_cycles", s.tune_cycles},
        {"tune_iterations", s.tune_iterations},
        {"target_acceptance", {s.target_accept_lower, s.target_accept_upper}},
        {"prop_corr_alpha_delta", s.prop_corr_alpha_delta},
        {"prop_corr_beta_all", s.prop_corr_beta_all},
        {"prop_corr_beta_nat", s.prop_corr_beta_nat},
        {"beta_sufficient_step", step_name(s.beta_sufficient_step)},
        {"stream", s.stream}}},
      {"prior",
       {{"beta_sd", prior.beta_sd},
        {"var_lower", prior.var_lower},
        {"var_upper", prior.var_upper},
        {"cauchy_scale", prior.cauchy_scale},
        {"logit_bound", prior.logit_bound ? json(*prior.logit_bound) : json(nullptr)}}},
  };
}

// Inputs resolved and checked, ready for sampling.
struct PreparedFit {
  RegionData region;
  CovariateSeries covs;
  PriorConfig prior;
  std::string region_id;
  double x_star_all = 0.0, x_star_nat = 0.0;
};

PreparedFit prepare_fit(const FitOptions& o) {
  PreparedFit p;
  try {
    p.region = load_region(o.region_file, o.event_type);
  } catch (const FileNotFound& e) {
    throw Failure{kMissingFile, e.what()};
  } catch (const std::exception& e) {
    throw Failure{kRegionError, e.what()};
  }
  CovariateData data;
  try {
    data = load_covariates(o.covariate_file);
  } catch (const FileNotFound& e) {
    throw Failure{kMissingFile, e.what()};
  } catch (const std::exception& e) {
    throw Failure{kCovariateError, e.what()};
  }
  try {
    p.covs = covariates_for_years(data, p.region.panel.years());
  } catch (const std::exception& e) {
    throw Failure{kCovariateError, o.covariate_file.string() + ": " + e.what()};
  }

  p.region_id = o.region_id.empty() ? o.region_file.stem().string() : o.region_id;
  p.prior = o.prior;
  if (!o.bound_from_flag) {
    if (o.bounds_file) {
      std::map<std::string, LogitBounds> table;
      try {
        table = load_bounds(*o.bounds_file);
      } catch (const FileNotFound& e) {
        throw Failure{kMissingFile, e.what()};
      } catch (const std::exception& e) {
        throw Failure{kBoundsError, e.what()};
      }
      const auto it = table.find(p.region_id);
      if (it == table.end())
        throw Failure{kBoundsError, o.bounds_file->string() + ": no row for region '" + p.region_id + "'"};
      p.prior.logit_bound = -it->second.lower_for(o.event_type);
    } else {
      p.prior.logit_bound = kDefaultLogitBound;
    }
  }

  try {
    p.prior.validate();
    o.sampler.validate();
    o.levels.validate();
    if (o.cutoffs.empty()) throw ValidationError("at least one cutoff is required");
    for (const auto& c : o.cutoffs) c.validate();
    if (o.chains < 1 || o.chains > 256) throw ValidationError("chains must lie in [1, 256]");
    const auto ref = reference_covariates(p.covs, o.reference_window);
    p.x_star_all = o.x_star_all.value_or(ref.first);
    p.x_star_nat = o.x_star_nat.value_or(ref.second);
  } catch (const std::exception& e) {
    throw Failure{kInvalidConfig, e.what()};
  }
  return p;
}

void check_writable(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_directory(dir, ec))
    throw Failure{kOutputError, "output path exists and is not a directory: " + dir.string()};
  fs::path probe_dir = dir;
  while (!probe_dir.empty() && !fs::exists(probe_dir, ec)) probe_dir = probe_dir.parent_path();
  if (probe_dir.empty()) probe_dir = ".";
  const fs::path probe = probe_dir / ".rrtime_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw Failure{kOutputError, "output directory not writable: " + dir.string()};
  }
  fs::remove(probe, ec);
}

void print_summary(std::ostream& out, const PreparedFit& p, const FitResults& r, const std::filesystem::path& dir) {
  const auto& years = p.region.panel.years();
  out << "region " << p.region_id << "  event " << to_string(p.region.event_type) << "  years " << years.front()
      << "-" << years.back() << " (T=" << years.size() << ")  seed " << r.seed << "\n";
  out << "chains " << r.chains << "  retained draws " << r.retained_total << " (" << r.retained_per_chain
      << " per chain)  logit bound "
      << (p.prior.logit_bound ? fmt(*p.prior.logit_bound) : std::string("inactive")) << "\n";
  out << "sigma  median " << fmt(r.sigma.median) << "  " << fmt(100 * (r.levels.upper - r.levels.lower), 3)
      << "% interval [" << fmt(r.sigma.lower) << ", " << fmt(r.sigma.upper) << "]\n";
  out << "x* (ALL, NAT) = (" << fmt(r.x_star_all) << ", " << fmt(r.x_star_nat) << ")\n";
  out << "cutoff              pi_median  pi_lower  pi_upper  category\n";
  for (const auto& e : r.exceedance) {
    std::string label = e.cutoff.label();
    label.resize(std::max<std::size_t>(label.size(), 18), ' ');
    out << label << "  " << fixed(e.median, 3) << "      " << fixed(e.lower, 3) << "     " << fixed(e.upper, 3)
        << "     " << static_cast<int>(e.category) << "\n";
  }
  std::size_t in_band = 0;
  for (double a : r.acceptance_rates) in_band += (a >= 0.2 && a <= 0.5);
  const auto [mn, mx] = std::minmax_element(r.acceptance_rates.begin(), r.acceptance_rates.end());
  out << "acceptance over " << r.acceptance_rates.size() << " blocks: min " << fixed(*mn, 3) << "  max "
      << fixed(*mx, 3) << "  in [0.2, 0.5]: " << in_band << "\n";
  for (const auto& w : r.tuning_warnings) out << "warning: " << w << "\n";
  out << "results written to " << dir.string() << "\n";
}

std::vector<double> default_raw_covariate(std::size_t T, bool all_forcings) {
  std::vector<double> x(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double u = static_cast<double>(t);
    x[t] = all_forcings ? 14.0 + 0.02 * u + 0.06 * std::sin(1.3 * u) : 13.9 + 0.05 * std::sin(0.9 * u + 0.4);
  }
  return x;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::vector<Cutoff> make_cutoffs(const std::vector<double>& values, Direction direction) {
  std::vector<Cutoff> out;
  if (direction == Direction::Between) {
    if (values.size() % 2 != 0) throw ValidationError("between-cutoffs need pairs of values");
    for (std::size_t i = 0; i < values.size(); i += 2) out.push_back({direction, values[i], values[i + 1]});
  } else {
    for (double v : values) out.push_back({direction, v, 0.0});
  }
  for (const auto& c : out) c.validate();
  return out;
}

int cmd_validate(const FitOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const PreparedFit p = prepare_fit(options);
    out << "ok: region " << p.region_id << ", event " << to_string(options.event_type) << ", "
        << p.region.panel.num_years() << " years (" << p.region.panel.years().front() << "-"
        << p.region.panel.years().back() << "), logit bound "
        << (p.prior.logit_bound ? fmt(*p.prior.logit_bound) : std::string("inactive")) << ", retained draws "
        << options.sampler.retained_count() * options.chains << "\n";
    return kOk;
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  }
}

int cmd_fit(const FitOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const PreparedFit p = prepare_fit(options);
    check_writable(options.output_dir);

    PosteriorDraws draws;
    try {
      draws = run_chains(p.region.panel, p.covs, p.prior, options.sampler, options.chains);
    } catch (const std::exception& e) {
      throw Failure{kSamplerFailure, std::string("sampler failed: ") + e.what()};
    }

    const auto& years = p.region.panel.years();
    FitResults r;
    r.years = years;
    r.levels = options.levels;
    r.prob_all = summarize_probabilities(draws, p.covs, Scenario::All, years, options.levels);
    r.prob_nat = summarize_probabilities(draws, p.covs, Scenario::Nat, years, options.levels);
    r.risk_ratio = summarize_risk_ratio(draws, p.covs, years, options.levels);
    r.adjusted_risk_ratio =
        summarize_adjusted_risk_ratio(draws, p.x_star_all, p.x_star_nat, years, options.levels);
    for (const auto& c : options.cutoffs)
      r.exceedance.push_back(exceedance_pi(draws, p.x_star_all, p.x_star_nat, c, options.levels));
    r.sigma = sigma_summary(draws, options.levels);
    r.x_star_all = p.x_star_all;
    r.x_star_nat = p.x_star_nat;
    r.reference_window = options.reference_window;
    r.seed = options.sampler.seed;
    r.chains = options.chains;
    r.retained_per_chain = options.sampler.retained_count();
    r.retained_total = draws.states.size();
    r.block_names = draws.block_names;
    r.acceptance_rates = draws.acceptance_rates;
    r.proposal_sds = draws.proposal_sds;
    r.tuning_warnings = draws.tuning_warnings;
    r.config = config_echo(options, p.region_id, p.prior);

    try {
      write_results(options.output_dir, r, options.write_draws ? &draws.states : nullptr);
    } catch (const std::exception& e) {
      throw Failure{kOutputError, e.what()};
    }
    print_summary(out, p, r, options.output_dir);
    return kOk;
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  }
}

int cmd_phi_ci(const PhiOptions& o, std::ostream& out, std::ostream& err) {
  PhiInterval ci;
  Verdict verdict;
  try {
    ci = o.sigma2_interval ? phi_ci_widened(o.input, o.sigma2_interval->first, o.sigma2_interval->second)
                           : phi_ci(o.input);
    verdict = robustness_verdict(o.input);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  }
  if (o.json) {
    json j = {{"xi_hat", o.input.xi_hat},
              {"sampling_var", o.input.sampling_var},
              {"sigma2", o.input.sigma2},
              {"p", o.input.percentile_p},
              {"confidence", o.input.confidence},
              {"s", o.input.total_sd()},
              {"log_lower", ci.log_lower},
              {"log_upper", ci.log_upper},
              {"ratio_lower", ci.ratio_lower},
              {"ratio_upper", ci.ratio_upper},
              {"verdict", to_string(verdict)}};
    if (o.sigma2_interval) {
      j["sigma2_interval"] = {o.sigma2_interval->first, o.sigma2_interval->second};
      j["widening"] = "heuristic";
    }
    out << j.dump() << "\n";
    return kOk;
  }
  out << "phi_p interval (p=" << fmt(o.input.percentile_p, 6) << ", confidence=" << fmt(o.input.confidence, 6)
      << ", s=" << fmt(o.input.total_sd(), 6) << (o.sigma2_interval ? ", widened over the sigma2 interval: heuristic" : "")
      << ")\n";
  out << "log scale:   (" << fixed(ci.log_lower, 3) << ", " << fixed(ci.log_upper, 3) << ")\n";
  out << "ratio scale: (" << fmt(ci.ratio_lower, 4) << ", " << fmt(ci.ratio_upper, 4) << ")\n";
  out << "verdict: " << to_string(verdict) << "\n";
  return kOk;
}

int cmd_threshold(double block_length_years, double periods_per_year, int decimals, std::ostream& out,
                  std::ostream& err) {
  ThresholdPercentiles tp;
  try {
    tp = threshold_percentiles(block_length_years, periods_per_year);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  }
  decimals = std::clamp(decimals, 0, 17);
  out << "upper_percentile " << fixed(tp.upper, decimals) << " (" << format_real(tp.upper) << ")\n";
  out << "lower_percentile " << fixed(tp.lower, decimals) << " (" << format_real(tp.lower) << ")\n";
  return kOk;
}

int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  json doc;
  {
    std::ifstream in(o.spec_file);
    if (!in) {
      err << "error: generator document not found: " << o.spec_file.string() << "\n";
      return kMissingFile;
    }
    try {
      doc = json::parse(in);
    } catch (const std::exception& e) {
      err << "error: " << o.spec_file.string() << ": " << e.what() << "\n";
      return kInvalidConfig;
    }
  }

  GeneratorSpec spec;
  CovariateData covdata;
  EventType event = EventType::Hot;
  try {
    event = parse_event_type(get_or<std::string>(doc, "event_type", "hot"));
    if (doc.contains("years")) {
      spec.years = doc.at("years").get<std::vector<int>>();
    } else {
      const int first = get_or<int>(doc, "first_year", 1982);
      const long long T = get_or<long long>(doc, "num_years", 0);
      if (T < 0 || T > 100000) throw ValidationError("num_years out of range");
      spec.years.resize(static_cast<std::size_t>(T));
      std::iota(spec.years.begin(), spec.years.end(), first);
    }
    const std::size_t T = spec.years.size();
    if (T == 0) throw ValidationError("generator needs at least one year");
    for (std::size_t t = 1; t < T; ++t)
      if (spec.years[t] != spec.years[t - 1] + 1) throw ValidationError("years must be consecutive and ascending");
    spec.ensemble_sizes = doc.contains("ensemble_sizes") ? doc.at("ensemble_sizes").get<std::vector<int>>()
                                                         : table_ensemble_schedule(T);
    if (doc.contains("covariates")) {
      covdata.raw_all = doc.at("covariates").at("raw_all").get<std::vector<double>>();
      covdata.raw_nat = doc.at("covariates").at("raw_nat").get<std::vector<double>>();
    } else {
      covdata.raw_all = default_raw_covariate(T, true);
      covdata.raw_nat = default_raw_covariate(T, false);
    }
    if (covdata.raw_all.size() != T || covdata.raw_nat.size() != T)
      throw ValidationError("covariate series must have one value per year");
    if (T < 2) throw ValidationError("covariates cannot be standardized with fewer than 2 years");
    covdata.scaled = CovariateSeries::standardize(covdata.raw_all, covdata.raw_nat);
    covdata.years = spec.years;
    spec.covariates = covdata.scaled;

    const std::uint64_t seed = o.seed ? *o.seed : doc.at("seed").get<std::uint64_t>();
    spec.seed = seed;
    const json& st = doc.at("state");
    ParamState s = ParamState::zeros(T);
    const auto ba = st.at("beta_A").get<std::vector<double>>();
    const auto bn = st.at("beta_N").get<std::vector<double>>();
    if (ba.size() != 2 || bn.size() != 2) throw ValidationError("beta_A and beta_N need (intercept, slope)");
    s.beta_all = {ba[0], ba[1]};
    s.beta_nat = {bn[0], bn[1]};
    s.tau2 = st.at("tau2").get<double>();
    s.sigma2 = st.at("sigma2").get<double>();
    s.omega2 = st.at("omega2").get<double>();
    for (double v : {s.tau2, s.sigma2, s.omega2})
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("state variances must be positive");
    RandomStream effects_rng(seed, 1);
    draw_random_effects(s, effects_rng);
    if (st.contains("alpha")) s.alpha = st.at("alpha").get<std::vector<double>>();
    if (st.contains("delta")) s.delta = st.at("delta").get<std::vector<double>>();
    if (st.contains("gamma")) {
      const auto g = st.at("gamma").get<std::vector<double>>();
      if (g.size() != kMonths) throw ValidationError("gamma needs 12 values");
      std::copy(g.begin(), g.end(), s.gamma.begin());
    }
    spec.true_state = s;
    spec.validate();
  } catch (const std::exception& e) {
    err << "error: invalid generator document " << o.spec_file.string() << ": " << e.what() << "\n";
    return kInvalidConfig;
  }

  const CountPanel panel = generate_panel(spec);
  std::ostringstream region_text, cov_text;
  write_region(region_text, panel, event);
  write_covariates(cov_text, covdata);
  std::vector<std::pair<std::filesystem::path, std::string>> files = {{o.region_out, region_text.str()},
                                                                      {o.covariates_out, cov_text.str()}};
  if (o.truth_out) {
    const ParamState& s = spec.true_state;
    json truth = {{"seed", spec.seed},
                  {"years", spec.years},
                  {"ensemble_sizes", spec.ensemble_sizes},
                  {"alpha", s.alpha},
                  {"delta", s.delta},
                  {"gamma", s.gamma},
                  {"beta_A", {s.beta_all.intercept, s.beta_all.slope}},
                  {"beta_N", {s.beta_nat.intercept, s.beta_nat.slope}},
                  {"tau2", s.tau2},
                  {"sigma2", s.sigma2},
                  {"omega2", s.omega2}};
    files.emplace_back(*o.truth_out, truth.dump(2) + "\n");
  }
  for (const auto& [path, body] : files) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << body;
    f.close();
    if (!f) {
      err << "error: cannot write " << path.string() << "\n";
      return kOutputError;
    }
  }
  out << "wrote " << o.region_out.string() << " (" << panel.num_years() << " years, event "
      << to_string(event) << ") and " << o.covariates_out.string() << "\n";
  return kOk;
}

namespace {

// Raw flag values that need conversion after CLI11 parsing.
struct FitFlags {
  std::string event_type;
  std::string direction = "greater";
  std::vector<double> cutoffs{1.0};
  std::string logit_bound;
  std::string beta_step = "exact";
  int start_keep = 0;
  std::string bounds_file;
  bool tune_iterations_given = false;
  std::string degenerate = "auto";
  CLI::Option* beta_a_corr = nullptr;
  CLI::Option* beta_n_corr = nullptr;
};

void add_fit_options(CLI::App* sub, FitOptions& o, FitFlags& f) {
  sub->add_option("--manifest", "INI-style key = value file supplying any of these options (flags win)");
  sub->add_option("--region-file", o.region_file, "Region count table")->required();
  sub->add_option("--covariates", o.covariate_file, "Covariate (gmt) table")->required();
  sub->add_option("--bounds", f.bounds_file, "Logit lower-bound table (region, hot_limits, ...)");
  sub->add_option("--region", o.region_id, "Region key in the bounds table (default: region file stem)");
  sub->add_option("--event-type", f.event_type, "hot, cold or wet")->required();
  sub->add_option("--output-dir", o.output_dir, "Directory for result files");
  sub->add_option("--seed", o.sampler.seed, "Master seed (mandatory)")->required();
  sub->add_option("--iterations", o.sampler.iterations, "Post-tuning iterations")->capture_default_str();
  sub->add_option("--burn-in", o.sampler.burn_in, "Leading states discarded")->capture_default_str();
  sub->add_option("--start-keep", f.start_keep, "1-based first kept state (burn-in = start_keep - 1)");
  sub->add_option("--thin", o.sampler.thin, "Keep every thin-th state")->capture_default_str();
  sub->add_option("--tune-cycles", o.sampler.tune_cycles, "Tuning cycles")->capture_default_str();
  sub->add_option("--tune-iterations", o.sampler.tune_iterations, "Iterations per tuning cycle")
      ->capture_default_str()
      ->delimiter(',')
      ->each([&f](const std::string&) { f.tune_iterations_given = true; });
  sub->add_option("--alpha-delta-corr", o.sampler.prop_corr_alpha_delta, "(alpha_t, delta_t) proposal correlation")
      ->capture_default_str();
  f.beta_a_corr = sub->add_option("--beta-a-corr", o.sampler.prop_corr_beta_all, "beta_A proposal correlation")
                      ->capture_default_str();
  f.beta_n_corr = sub->add_option("--beta-n-corr", o.sampler.prop_corr_beta_nat, "beta_N proposal correlation")
                      ->capture_default_str();
  sub->add_option("--degenerate-scenario", f.degenerate,
                  "ALL, NAT, none or auto: scenario with near-zero counts, whose beta proposal gets "
                  "correlation -0.95 unless set explicitly; auto means NAT for hot, ALL for cold, none for wet")
      ->capture_default_str();
  sub->add_option("--beta-step", f.beta_step, "Sufficient-step beta update: exact, independent or skip")
      ->capture_default_str();
  sub->add_option("--logit-bound", f.logit_bound, "L for the +-L logit bound, or 'none' (overrides --bounds)");
  sub->add_option("--beta-sd", o.prior.beta_sd, "Prior sd of regression coefficients")->capture_default_str();
  sub->add_option("--var-lower", o.prior.var_lower, "Lower end of the uniform variance prior")
      ->capture_default_str();
  sub->add_option("--var-upper", o.prior.var_upper, "Upper end of the uniform variance prior")
      ->capture_default_str();
  sub->add_option("--cauchy-scale", o.prior.cauchy_scale, "Half-Cauchy scale for omega2")->capture_default_str();
  sub->add_option("--cutoffs", f.cutoffs, "Risk-ratio cutoffs, comma separated")->delimiter(',')->capture_default_str();
  sub->add_option("--direction", f.direction, "greater, less or between (also >, <, <>)")->capture_default_str();
  sub->add_option("--ref-window", o.reference_window, "Years averaged for the reference covariate x*")
      ->capture_default_str();
  sub->add_option("--x-star-all", o.x_star_all, "Explicit ALL reference covariate");
  sub->add_option("--x-star-nat", o.x_star_nat, "Explicit NAT reference covariate");
  sub->add_option("--lower-quantile", o.levels.lower, "Lower credible quantile")->capture_default_str();
  sub->add_option("--upper-quantile", o.levels.upper, "Upper credible quantile")->capture_default_str();
  sub->add_option("--chains", o.chains, "Independent chains, run concurrently and concatenated")
      ->capture_default_str();
  sub->add_flag("--write-draws", o.write_draws, "Also write every retained state to draws.tsv");
}

constexpr double kDegenerateBetaCorr = -0.95;

std::string lower_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Converts the raw flags; ValidationError on bad values.
void finish_fit_options(FitOptions& o, const FitFlags& f) {
  o.event_type = parse_event_type(f.event_type);
  o.cutoffs = make_cutoffs(f.cutoffs, parse_direction(f.direction));
  if (!f.bounds_file.empty()) o.bounds_file = f.bounds_file;
  if (!f.logit_bound.empty()) {
    o.bound_from_flag = true;
    if (f.logit_bound == "none" || f.logit_bound == "inactive") o.prior.logit_bound.reset();
    else o.prior.logit_bound = parse_real(f.logit_bound, "--logit-bound");
  }
  if (f.beta_step == "exact") o.sampler.beta_sufficient_step = BetaSufficientStep::ExactConditional;
  else if (f.beta_step == "independent") o.sampler.beta_sufficient_step = BetaSufficientStep::IndependentMarginal;
  else if (f.beta_step == "skip") o.sampler.beta_sufficient_step = BetaSufficientStep::Skip;
  else throw ValidationError("--beta-step must be exact, independent or skip");
  if (f.start_keep > 0) o.sampler.burn_in = f.start_keep - 1;
  std::string deg = lower_ascii(f.degenerate);
  if (deg == "auto")
    deg = o.event_type == EventType::Hot ? "nat" : (o.event_type == EventType::Cold ? "all" : "none");
  if (deg == "all") {
    if (f.beta_a_corr->count() == 0) o.sampler.prop_corr_beta_all = kDegenerateBetaCorr;
  } else if (deg == "nat") {
    if (f.beta_n_corr->count() == 0) o.sampler.prop_corr_beta_nat = kDegenerateBetaCorr;
  } else if (deg != "none") {
    throw ValidationError("--degenerate-scenario must be ALL, NAT, none or auto");
  }
  if (!f.tune_iterations_given && o.sampler.tune_cycles > 0) {
    auto& it = o.sampler.tune_iterations;
    it.resize(static_cast<std::size_t>(o.sampler.tune_cycles), it.empty() ? 800 : it.back());
  }
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Replaces `--manifest FILE` after fit/validate with the file's keys as flags.
// Keys already given on the command line keep their command-line value, and
// relative input/output paths are taken relative to the manifest's directory.
std::vector<std::string> expand_manifest(std::vector<std::string> args) {
  if (args.empty() || (args[0] != "fit" && args[0] != "validate")) return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--manifest") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--manifest needs a file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--manifest=", 0) == 0) {
      path = args[i].substr(11);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  if (!std::filesystem::is_regular_file(path)) throw CLI::FileError::Missing(path);
  const auto base = std::filesystem::path(path).parent_path();
  static const std::vector<std::string> kPathKeys = {"region-file", "covariates", "bounds", "output-dir"};
  std::vector<std::string> extra;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == args[0])) continue;
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string flag = "--" + item.name;
    if (item.name == "manifest") throw CLI::ArgumentMismatch("a manifest cannot name another manifest");
    if (has_flag(args, flag)) continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    if (std::find(kPathKeys.begin(), kPathKeys.end(), item.name) != kPathKeys.end() &&
        std::filesystem::path(value).is_relative())
      value = (base / value).string();
    extra.push_back(flag + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-varying risk ratios for extreme-event attribution"};
  app.name("rrtime");
  app.require_subcommand(1);

  FitOptions fit, val;
  FitFlags fit_flags, val_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Tune, sample and summarize one region and event type");
  add_fit_options(fit_cmd, fit, fit_flags);
  fit_cmd->get_option("--output-dir")->required();
  auto* val_cmd = app.add_subcommand("validate", "Parse and check every fit input without sampling");
  add_fit_options(val_cmd, val, val_flags);

  PhiOptions phi;
  std::vector<double> sigma2_interval;
  auto* phi_cmd = app.add_subcommand("phi-ci", "Interval for a population percentile of the log risk ratio");
  phi_cmd->add_option("--xi-hat", phi.input.xi_hat, "Single-year log risk ratio estimate")->required();
  phi_cmd->add_option("--sampling-var", phi.input.sampling_var, "Sampling variance nu^2/n")->required();
  phi_cmd->add_option("--sigma2", phi.input.sigma2, "Interannual variance")->required();
  phi_cmd->add_option("--p", phi.input.percentile_p, "Percentile")->capture_default_str();
  phi_cmd->add_option("--confidence", phi.input.confidence, "Confidence level")->capture_default_str();
  phi_cmd->add_option("--sigma2-interval", sigma2_interval, "lower,upper: widen over a sigma2 interval")
      ->delimiter(',')
      ->expected(2);
  phi_cmd->add_flag("--json", phi.json, "Print a JSON record instead of text");

  double block = 10.0, periods = 12.0;
  int decimals = 2;
  auto* thr_cmd = app.add_subcommand("threshold", "Percentile pair for a one-in-N-years monthly event");
  thr_cmd->add_option("--block-years", block, "Return period in years")->capture_default_str();
  thr_cmd->add_option("--periods", periods, "Periods (months) per year")->capture_default_str();
  thr_cmd->add_option("--decimals", decimals, "Decimals in the rounded output")->capture_default_str();

  GenerateOptions gen;
  std::string truth_out;
  std::uint64_t gen_seed = 0;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic region file from a JSON generator document");
  gen_cmd->add_option("--spec", gen.spec_file, "Generator spec (JSON)")->required();
  gen_cmd->add_option("--out", gen.region_out, "Region file to write")->required();
  gen_cmd->add_option("--covariates-out", gen.covariates_out, "Covariate file to write")->required();
  gen_cmd->add_option("--truth-out", truth_out, "Also write the generating state as JSON");
  auto* gen_seed_opt = gen_cmd->add_option("--seed", gen_seed, "Override the document's seed");

  try {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    args = expand_manifest(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << "\n";
    return kMissingFile;
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      finish_fit_options(fit, fit_flags);
      return cmd_fit(fit, out, err);
    }
    if (val_cmd->parsed()) {
      finish_fit_options(val, val_flags);
      return cmd_validate(val, out, err);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  }
  if (phi_cmd->parsed()) {
    if (!sigma2_interval.empty()) phi.sigma2_interval = std::make_pair(sigma2_interval[0], sigma2_interval[1]);
    return cmd_phi_ci(phi, out, err);
  }
  if (thr_cmd->parsed()) return cmd_threshold(block, periods, decimals, out, err);
  if (gen_cmd->parsed()) {
    if (!truth_out.empty()) gen.truth_out = truth_out;
    if (gen_seed_opt->count() > 0) gen.seed = gen_seed;
    return cmd_generate(gen, out, err);
  }
  return kUsage;
}

}  // namespace rrtime::cli
