#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "rrtime/cli.hpp"

using namespace rrtime;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = RRTIME_FIXTURES;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "rrtime");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rrtime_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> quick_fit(const fs::path& out, std::initializer_list<std::string> extra = {}) {
  std::vector<std::string> a = {"fit",
                                "--region-file", (kFixtures / "region_T8.txt").string(),
                                "--covariates", (kFixtures / "gmt_T8.txt").string(),
                                "--event-type", "hot",
                                "--seed", "42",
                                "--iterations", "400",
                                "--tune-cycles", "2",
                                "--tune-iterations", "200,200",
                                "--output-dir", out.string()};
  a.insert(a.end(), extra);
  return a;
}

nlohmann::json summary_of(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / kSummaryFile)); }

}  // namespace

TEST_CASE("fit writes identical bytes for identical inputs") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(invoke(quick_fit(a)).code == cli::kOk);
  REQUIRE(invoke(quick_fit(b)).code == cli::kOk);
  for (const char* f : {kYearlyFile, kSummaryFile, kLongFile}) {
    CHECK(!slurp(a / f).empty());
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto c = scratch("det_c");
  auto args = quick_fit(c);
  args[8] = "43";
  REQUIRE(invoke(args).code == cli::kOk);
  CHECK(slurp(a / kYearlyFile) != slurp(c / kYearlyFile));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("fit summary content") {
  const auto dir = scratch("content");
  const auto r = invoke(quick_fit(dir, {"--cutoffs", "1,2,10", "--thin", "5", "--write-draws"}));
  REQUIRE(r.code == cli::kOk);
  const auto s = summary_of(dir);
  CHECK(s["exceedance"].size() == 3);
  CHECK(s["exceedance"][2]["label"] == "RR>10");
  CHECK(s["retained_draws"] == 400 / 5 + 1);
  CHECK(s["seed"] == 42);
  CHECK(s["num_years"] == 8);
  CHECK(s["acceptance_rates"].size() == 27);
  for (const auto& e : s["exceedance"]) {
    CHECK(e["pi_lower"].get<double>() <= e["pi_median"].get<double>());
    CHECK(e["pi_median"].get<double>() <= e["pi_upper"].get<double>());
    const int cat = e["category"];
    CHECK((cat >= 1 && cat <= 3));
  }
  std::ifstream yearly(dir / kYearlyFile);
  CHECK(read_yearly_table(yearly, "yearly").size() == 8);
  std::ifstream draws(dir / kDrawsFile);
  CHECK(read_draws(draws, "draws").size() == 81);
  CHECK(r.out.find("RR>10") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("concurrent chains concatenate") {
  const auto dir = scratch("chains");
  REQUIRE(invoke(quick_fit(dir, {"--chains", "2", "--thin", "10"})).code == cli::kOk);
  const auto s = summary_of(dir);
  CHECK(s["chains"] == 2);
  CHECK(s["retained_per_chain"] == 41);
  CHECK(s["retained_draws"] == 82);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  const auto region = (kFixtures / "region_T8.txt").string();
  const auto gmt = (kFixtures / "gmt_T8.txt").string();

  SUBCASE("missing covariate file leaves no output") {
    auto a = quick_fit(dir);
    a[4] = "/nonexistent/gmt.txt";
    const auto r = invoke(a);
    CHECK(r.code == cli::kMissingFile);
    CHECK(r.err.find("/nonexistent/gmt.txt") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / kYearlyFile));
    CHECK_FALSE(fs::exists(dir / kSummaryFile));
  }
  SUBCASE("malformed region file") {
    auto a = quick_fit(dir);
    a[2] = gmt;
    CHECK(invoke(a).code == cli::kRegionError);
  }
  SUBCASE("malformed covariate file") {
    auto a = quick_fit(dir);
    a[4] = region;
    const auto r = invoke(a);
    CHECK(r.code == cli::kCovariateError);
    CHECK(r.err.find("missing column 'gmtA_raw'") != std::string::npos);
  }
  SUBCASE("bounds table without the region") {
    const auto r = invoke(quick_fit(dir, {"--bounds", (kFixtures / "bounds.txt").string(), "--region", "Atlantis"}));
    CHECK(r.code == cli::kBoundsError);
    CHECK(r.err.find("Atlantis") != std::string::npos);
  }
  SUBCASE("invalid configuration") {
    CHECK(invoke(quick_fit(dir, {"--thin", "0"})).code == cli::kInvalidConfig);
    CHECK(invoke(quick_fit(dir, {"--var-lower", "5", "--var-upper", "1"})).code == cli::kInvalidConfig);
    CHECK(invoke(quick_fit(dir, {"--direction", "between", "--cutoffs", "2,1"})).code == cli::kInvalidConfig);
    CHECK(invoke(quick_fit(dir, {"--beta-step", "sideways"})).code == cli::kInvalidConfig);
    auto a = quick_fit(dir);
    a[6] = "tepid";
    CHECK(invoke(a).code == cli::kInvalidConfig);
  }
  SUBCASE("unwritable output") {
    auto a = quick_fit(dir);
    a.back() = (fs::path(region) / "sub").string();
    CHECK(invoke(a).code == cli::kOutputError);
  }
  SUBCASE("usage errors") {
    CHECK(invoke({}).code == cli::kUsage);
    CHECK(invoke({"fit"}).code == cli::kUsage);
    CHECK(invoke(quick_fit(dir, {"--bogus"})).code == cli::kUsage);
    CHECK(invoke(quick_fit(dir, {"--thin", "five"})).code == cli::kUsage);
    CHECK(invoke({"--help"}).code == cli::kOk);
  }
  CHECK_FALSE(fs::exists(dir / kSummaryFile));
  fs::remove_all(dir);
}

TEST_CASE("bounds table supplies L unless a flag overrides it") {
  const auto dir = scratch("bounds");
  const auto bounds = (kFixtures / "bounds.txt").string();
  REQUIRE(invoke(quick_fit(dir, {"--bounds", bounds})).code == cli::kOk);
  CHECK(summary_of(dir)["config"]["prior"]["logit_bound"] == 12.0);
  REQUIRE(invoke(quick_fit(dir, {"--bounds", bounds, "--logit-bound", "9"})).code == cli::kOk);
  CHECK(summary_of(dir)["config"]["prior"]["logit_bound"] == 9.0);
  REQUIRE(invoke(quick_fit(dir, {"--logit-bound", "none"})).code == cli::kOk);
  CHECK(summary_of(dir)["config"]["prior"]["logit_bound"].is_null());
  REQUIRE(invoke(quick_fit(dir)).code == cli::kOk);
  CHECK(summary_of(dir)["config"]["prior"]["logit_bound"] == cli::kDefaultLogitBound);
  fs::remove_all(dir);
}

TEST_CASE("beta proposal correlation follows the event type unless overridden") {
  const auto dir = scratch("corr");
  REQUIRE(invoke(quick_fit(dir)).code == cli::kOk);
  auto cfg = summary_of(dir)["config"]["sampler"];
  CHECK(cfg["prop_corr_beta_nat"] == -0.95);
  CHECK(cfg["prop_corr_beta_all"] == 0.0);
  REQUIRE(invoke(quick_fit(dir, {"--degenerate-scenario", "none"})).code == cli::kOk);
  CHECK(summary_of(dir)["config"]["sampler"]["prop_corr_beta_nat"] == 0.0);
  REQUIRE(invoke(quick_fit(dir, {"--beta-n-corr", "-0.5"})).code == cli::kOk);
  CHECK(summary_of(dir)["config"]["sampler"]["prop_corr_beta_nat"] == -0.5);
  CHECK(invoke(quick_fit(dir, {"--degenerate-scenario", "both"})).code == cli::kInvalidConfig);
  fs::remove_all(dir);
}

TEST_CASE("manifest supplies options and command-line flags win") {
  const auto dir = scratch("manifest");
  const auto manifest = (kFixtures / "fit.ini").string();
  auto r = invoke({"fit", "--manifest", manifest, "--output-dir", dir.string(), "--iterations", "300", "--tune-cycles",
                   "1", "--tune-iterations", "200"});
  REQUIRE(r.code == cli::kOk);
  auto s = summary_of(dir);
  CHECK(s["seed"] == 7);
  CHECK(s["retained_draws"] == 300 / 5 + 1);
  CHECK(s["exceedance"].size() == 2);
  r = invoke({"fit", "--manifest=" + manifest, "--output-dir", dir.string(), "--iterations", "300", "--tune-cycles",
              "1", "--tune-iterations", "200", "--seed", "8", "--cutoffs", "3"});
  REQUIRE(r.code == cli::kOk);
  s = summary_of(dir);
  CHECK(s["seed"] == 8);
  CHECK(s["exceedance"].size() == 1);
  CHECK(invoke({"fit", "--manifest", "/nonexistent.ini", "--output-dir", dir.string()}).code == cli::kMissingFile);

  // Section headers and paths relative to the manifest's own directory.
  const auto sec = scratch("manifest_sections");
  fs::create_directories(sec);
  fs::copy_file(kFixtures / "region_T8.txt", sec / "region_T8.txt");
  fs::copy_file(kFixtures / "gmt_T8.txt", sec / "gmt_T8.txt");
  std::ofstream(sec / "m.ini") << "[fit]\nregion-file = region_T8.txt\ncovariates = gmt_T8.txt\nevent-type = hot\n"
                                  "seed = 5\niterations = 200\ntune-cycles = 1\ntune-iterations = 100\noutput-dir = out\n"
                                  "[validate]\nseed = 6\n";
  REQUIRE(invoke({"fit", "--manifest", (sec / "m.ini").string()}).code == cli::kOk);
  CHECK(summary_of(sec / "out")["seed"] == 5);
  fs::remove_all(sec);
  fs::remove_all(dir);
}

TEST_CASE("validate checks inputs without sampling") {
  const auto r = invoke({"validate", "--region-file", (kFixtures / "region_T8.txt").string(), "--covariates",
                         (kFixtures / "gmt_T8.txt").string(), "--event-type", "hot", "--seed", "1"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.rfind("ok:", 0) == 0);
  CHECK(invoke({"validate", "--region-file", (kFixtures / "gmt_T8.txt").string(), "--covariates",
                (kFixtures / "gmt_T8.txt").string(), "--event-type", "hot", "--seed", "1"})
            .code == cli::kRegionError);
}

TEST_CASE("phi-ci and threshold") {
  auto r = invoke({"phi-ci", "--xi-hat", "0", "--sampling-var", "1", "--sigma2", "0"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("(-3.605, 0.315)") != std::string::npos);
  CHECK(r.out.find("verdict: not_robust") != std::string::npos);
  r = invoke({"phi-ci", "--xi-hat", "10", "--sampling-var", "0.005", "--sigma2", "0.005", "--json"});
  REQUIRE(r.code == cli::kOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["verdict"] == "robust_above_1");
  r = invoke({"phi-ci", "--xi-hat", "0", "--sampling-var", "0.2", "--sigma2", "0.3", "--sigma2-interval", "0.1,0.9"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("heuristic") != std::string::npos);
  CHECK(invoke({"phi-ci", "--xi-hat", "0", "--sampling-var", "0", "--sigma2", "0"}).code == cli::kInvalidConfig);

  r = invoke({"threshold"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("upper_percentile 99.17") != std::string::npos);
  CHECK(r.out.find("lower_percentile 0.83") != std::string::npos);
  r = invoke({"threshold", "--block-years", "20", "--decimals", "3"});
  CHECK(r.out.find("99.583") != std::string::npos);
  CHECK(invoke({"threshold", "--block-years", "0"}).code == cli::kInvalidConfig);
}

TEST_CASE("generate is deterministic and validates its input document") {
  const auto dir = scratch("gen");
  fs::create_directories(dir);
  const auto spec = (kFixtures / "generate_T8.json").string();
  auto gen = [&](const std::string& tag, std::initializer_list<std::string> extra = {}) {
    std::vector<std::string> a = {"generate", "--spec", spec, "--out", (dir / (tag + "_r.txt")).string(),
                                  "--covariates-out", (dir / (tag + "_g.txt")).string(),
                                  "--truth-out", (dir / (tag + "_t.json")).string()};
    a.insert(a.end(), extra);
    return invoke(a).code;
  };
  REQUIRE(gen("a") == cli::kOk);
  REQUIRE(gen("b") == cli::kOk);
  REQUIRE(gen("c", {"--seed", "12"}) == cli::kOk);
  CHECK(slurp(dir / "a_r.txt") == slurp(dir / "b_r.txt"));
  CHECK(slurp(dir / "a_t.json") == slurp(dir / "b_t.json"));
  CHECK(slurp(dir / "a_r.txt") != slurp(dir / "c_r.txt"));
  // The checked-in fixture was produced by this very command.
  CHECK(slurp(dir / "a_r.txt") == slurp(kFixtures / "region_T8.txt"));
  CHECK(slurp(dir / "a_g.txt") == slurp(kFixtures / "gmt_T8.txt"));
  const auto truth = nlohmann::json::parse(slurp(dir / "a_t.json"));
  CHECK(truth["alpha"].size() == 8);
  CHECK(truth["gamma"].size() == 12);

  const auto write_spec = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return (dir / name).string();
  };
  const auto zero = write_spec("zero.json",
                               R"({"seed": 1, "event_type": "hot", "num_years": 0,
                                   "state": {"beta_A": [0, 0], "beta_N": [0, 0], "tau2": 1, "sigma2": 1, "omega2": 1}})");
  CHECK(invoke({"generate", "--spec", zero, "--out", (dir / "z.txt").string(), "--covariates-out",
                (dir / "zg.txt").string()})
            .code == cli::kInvalidConfig);
  const auto neg = write_spec("neg.json",
                              R"({"seed": 1, "event_type": "hot", "num_years": 3,
                                  "state": {"beta_A": [0, 0], "beta_N": [0, 0], "tau2": -1, "sigma2": 1, "omega2": 1}})");
  CHECK(invoke({"generate", "--spec", neg, "--out", (dir / "z.txt").string(), "--covariates-out",
                (dir / "zg.txt").string()})
            .code == cli::kInvalidConfig);
  CHECK(invoke({"generate", "--spec", (dir / "absent.json").string(), "--out", (dir / "z.txt").string(),
                "--covariates-out", (dir / "zg.txt").string()})
            .code == cli::kMissingFile);
  fs::remove_all(dir);
}
