#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "eslab_cli/commands.hpp"
#include "eslab_cli/io.hpp"
#include "eslab_cli/scenario.hpp"

namespace fs = std::filesystem;
using eslab::cli::json;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("eslab_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = eslab::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kSmallFlat = R"({
  // comments are allowed
  "name": "small flat",
  "landscape": {"kind": "flat", "dimension": 20, "sigma_xi": 1.0},
  "optimizer": {"method": "es", "sigma": 0.02, "alpha": 0.01, "population": 30,
                "steps": 100, "trials": 8, "seed": 3},
  "analysis": {"fit": true},
  "validation": {"checks": ["drift"], "tolerances": {"drift": 0.5}}
})";

}  // namespace

TEST(Scenario, RoundTripIsFixedPoint) {
  for (const char* name : {"flat_random_walk.json", "ou_spectrum.json", "rank5_hierarchy.json",
                           "gd_spectrum.json", "linear_moments.json", "large_model_flat_drift.json"}) {
    const auto s = eslab::cli::load_scenario(fs::path(ESLAB_SCENARIO_DIR) / name);
    const json once = eslab::cli::to_json(s);
    const json twice = eslab::cli::to_json(eslab::cli::parse_scenario(once));
    EXPECT_EQ(once, twice) << name;
    EXPECT_EQ(eslab::cli::scenario_hash(s),
              eslab::cli::scenario_hash(eslab::cli::parse_scenario(once)));
  }
}

TEST(Scenario, ReportsEveryProblem) {
  const json doc = json::parse(R"({
    "landscape": {"kind": "bumpy", "dimension": 0},
    "optimizer": {"method": "es", "sigma": -1, "population": 1, "steps": 10},
    "extra": 1
  })");
  try {
    eslab::cli::parse_scenario(doc);
    FAIL() << "expected ScenarioError";
  } catch (const eslab::cli::ScenarioError& e) {
    EXPECT_GE(e.issues().size(), 4u);
    const std::string all = e.what();
    EXPECT_NE(all.find("extra"), std::string::npos);
    EXPECT_NE(all.find("kind"), std::string::npos);
  }
}

TEST(Scenario, HashChangesWithContent) {
  auto a = eslab::cli::parse_scenario(json::parse(R"({
    "landscape": {"kind": "flat", "dimension": 4, "sigma_xi": 1.0},
    "optimizer": {"method": "es", "sigma": 0.1, "population": 4, "steps": 2}})"));
  auto b = a;
  b.optimizer.seed = 1;
  EXPECT_NE(eslab::cli::scenario_hash(a), eslab::cli::scenario_hash(b));
  EXPECT_DOUBLE_EQ(eslab::cli::resolved_alpha(a.optimizer), 0.05);
}

TEST(Io, AtomicWriteLeavesNoTemporary) {
  TempDir dir;
  const fs::path p = dir.path() / "nested" / "out.txt";
  eslab::cli::write_atomic(p, "hello\n");
  EXPECT_EQ(slurp(p), "hello\n");
  for (const auto& entry : fs::recursive_directory_iterator(dir.path()))
    EXPECT_NE(entry.path().extension(), ".tmp");
}

TEST(Io, CsvCarriesHashAndUnits) {
  TempDir dir;
  eslab::cli::CsvTable t("abc123", {"step[-]", "drift_sq[param^2]"});
  t.row().cell(std::size_t{0}).cell(0.0);
  t.row().cell(std::size_t{1}).cell(0.25);
  eslab::cli::write_atomic(dir.path() / "t.csv", t.str());
  const std::string text = slurp(dir.path() / "t.csv");
  EXPECT_EQ(text.rfind("# scenario abc123\n", 0), 0u);
  EXPECT_EQ(eslab::cli::read_csv_column(dir.path() / "t.csv", "drift_sq"),
            (std::vector<double>{0.0, 0.25}));
}

TEST(Io, NumbersRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(eslab::cli::format_number(x)), x);
  EXPECT_EQ(eslab::cli::format_number(std::nan("")), "nan");
}

TEST(Cli, PredictPrintsFlatJson) {
  TempDir dir;
  const auto path = write_file(dir.path() / "s.json", kSmallFlat);
  const auto r = cli({"--scenario", path.string(), "--out", dir.path().string(), "predict"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["prop1.slope"].get<double>(), 1e-4 * 20 / 30, 1e-18);
  EXPECT_TRUE(fs::exists(dir.path() / "predict.json"));
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"predict"}).code, 1);
  EXPECT_EQ(cli({"--scenario", "/nonexistent/s.json", "predict"}).code, 1);
  EXPECT_EQ(cli({"bogus"}).code, 1);
}

TEST(Cli, FitFromSlopeNeedsNoScenario) {
  const auto r = cli({"fit", "--slope", "72.74", "--alpha", "7.5e-4", "--population", "30",
                      "--dimension", "4022468096"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["d_eff_ratio"].get<double>(), 0.964, 0.001);
}

TEST(Cli, SimulateIsByteIdenticalAcrossRunsAndThreads) {
  TempDir dir;
  const auto path = write_file(dir.path() / "s.json", kSmallFlat);
  const fs::path a = dir.path() / "a", b = dir.path() / "b";
  ASSERT_EQ(cli({"--scenario", path.string(), "--out", a.string(), "--threads", "1", "--quiet",
                 "simulate"}).code, 0);
  ASSERT_EQ(cli({"--scenario", path.string(), "--out", b.string(), "--threads", "3", "--quiet",
                 "simulate"}).code, 0);
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    EXPECT_NE(entry.path().extension(), ".tmp");
    ++files;
  }
  EXPECT_GE(files, 10u);
  const std::string ensemble = slurp(a / "ensemble.csv");
  EXPECT_EQ(ensemble.rfind("# scenario ", 0), 0u);
}

TEST(Cli, ValidateExitCodes) {
  TempDir dir;
  const auto pass = write_file(dir.path() / "pass.json", kSmallFlat);
  const auto r = cli({"--scenario", pass.string(), "--out", dir.path().string(), "validate"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("overall PASS"), std::string::npos);

  json doc = json::parse(kSmallFlat, nullptr, true, true);
  doc["validation"]["prediction_overrides"] = {{"alpha", 0.03}};
  const auto fail = write_file(dir.path() / "fail.json", doc.dump());
  const auto f = cli({"--scenario", fail.string(), "--out", dir.path().string(), "validate"});
  EXPECT_EQ(f.code, 2);
  EXPECT_NE(f.out.find("overall FAIL"), std::string::npos);

  doc = json::parse(kSmallFlat, nullptr, true, true);
  doc["validation"]["tolerances"] = json::object();
  const auto missing = write_file(dir.path() / "missing.json", doc.dump());
  EXPECT_EQ(cli({"--scenario", missing.string(), "--out", dir.path().string(), "validate"}).code, 1);
}

TEST(Cli, DivergedRunExitsThree) {
  TempDir dir;
  const auto path = write_file(dir.path() / "gd.json", R"({
    "landscape": {"kind": "quadratic", "dimension": 2, "spectrum": {"values": [1.0, 25.0]}},
    "initial": {"fill": 1.0},
    "optimizer": {"method": "gd", "beta": 0.1, "steps": 400}
  })");
  const auto r = cli({"--scenario", path.string(), "--out", dir.path().string(), "--quiet",
                      "simulate"});
  EXPECT_EQ(r.code, 3);
}
