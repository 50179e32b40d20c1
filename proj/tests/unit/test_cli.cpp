#include "commands.hpp"
#include "spec_file.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace horizonlab;
using namespace horizonlab::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kSpecs = HORIZONLAB_SPECS_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("horizonlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  fs::path dir_;
};

Json minimal_switched() {
  return Json::parse(R"({"spec_version": 1, "kind": "switched",
    "A1": [[-0.1, 0.0], [0.0, -0.8]], "A2": [[-0.2, 0.0], [0.0, -0.6]], "x0": [1.0, 2.0], "T": 5.0})");
}

} // namespace

TEST(SpecParsing, AcceptsMinimalSwitchedSpec) {
  const auto s = parse_spec(minimal_switched());
  EXPECT_EQ(s.kind, "switched");
  EXPECT_EQ(s.horizon(), 5.0);
  EXPECT_TRUE(s.pair.has_value());
}

TEST(SpecParsing, RejectsWrongVersion) {
  auto j = minimal_switched();
  j["spec_version"] = 2;
  EXPECT_THROW(parse_spec(j), ConfigError);
  j.erase("spec_version");
  EXPECT_THROW(parse_spec(j), ConfigError);
}

TEST(SpecParsing, RejectsUnknownKeys) {
  auto j = minimal_switched();
  j["colour"] = "blue";
  EXPECT_THROW(parse_spec(j), ConfigError);
  j = minimal_switched();
  j["solver"] = {{"relaxed_intervals", 10}, {"bogus", 1}};
  EXPECT_THROW(parse_spec(j), ConfigError);
}

TEST(SpecParsing, RejectsUnknownKindAndBadDimensions) {
  auto j = minimal_switched();
  j["kind"] = "pendulum";
  EXPECT_THROW(parse_spec(j), ConfigError);
  j = minimal_switched();
  j["x0"] = {1.0, 2.0, 3.0};
  EXPECT_THROW(parse_spec(j), ConfigError);
}

TEST(SpecParsing, AllShippedSpecsLoad) {
  for (const auto& e : fs::directory_iterator(kSpecs)) {
    if (e.path().filename() == "pair_certified.json") continue;
    EXPECT_NO_THROW(load_spec(e.path().string())) << e.path();
  }
}

TEST_F(CliTest, SimulateSirWritesStateColumns) {
  const auto ctrl = write("u.json", R"({"breakpoints": [0, 10], "values": [[0.1, 0.1]], "tail": [0.1, 0.0]})");
  const auto out = dir_ / "x.csv";
  EXPECT_EQ(guarded([&] { return cmd_simulate((kSpecs / "sir_vacc.json").string(), ctrl.string(), out.string()); }),
            kExitOk);
  const auto rows = csv_rows(slurp(out));
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "s", "i"}));
}

TEST_F(CliTest, SimulateRejectsStateOutsideTriangle) {
  auto j = Json::parse(slurp(kSpecs / "sir_vacc.json"));
  j["x0"] = {0.8, 0.3};
  const auto spec = write("spec.json", j.dump());
  const auto ctrl = write("u.json", R"({"breakpoints": [0], "values": [], "tail": [0.3, 0.0]})");
  ::testing::internal::CaptureStderr();
  const int code = guarded([&] { return cmd_simulate(spec.string(), ctrl.string(), (dir_ / "x.csv").string()); });
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, kExitInfeasible);
  EXPECT_NE(err.find("initial condition outside unit triangle"), std::string::npos);
}

TEST_F(CliTest, SimulateBlowupTruncatesAtEscape) {
  const auto out = dir_ / "x.csv";
  ::testing::internal::CaptureStderr();
  const int code = guarded([&] { return cmd_simulate((kSpecs / "blowup.json").string(), "", out.string()); });
  ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, kExitInfeasible);
  const std::string text = slurp(out);
  const auto pos = text.rfind("# escape_time=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(text.substr(pos + 14)), 1.0, 0.01);
}

TEST_F(CliTest, MalformedSpecIsUsageError) {
  const auto spec = write("bad.json", "{\"spec_version\": 1, \"kind\": ");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(guarded([&] { return cmd_solve(spec.string(), (dir_ / "out").string()); }), kExitUsage);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, CheckConditionVerdicts) {
  struct Case {
    const char* matrices;
    const char* verdict;
  };
  const Case cases[] = {
      {R"({"A1": [[0.0, 0.3], [0.2, 0.5]], "A2": [[-1.0, 0.3], [0.2, -0.5]]})", "vacuous"},
      {R"({"A1": [[-1.0, 0.3], [0.2, -0.5]], "A2": [[-1.0, 0.3], [0.2, -0.5]]})", "fails"},
      {R"({"A1": [[-0.1, 0.0], [0.0, -0.8]], "A2": [[-0.2, 0.0], [0.0, -0.6]]})", "holds"},
  };
  for (const auto& c : cases) {
    const auto m = write("m.json", c.matrices);
    const auto out = dir_ / "cond.json";
    ASSERT_EQ(guarded([&] { return cmd_check_condition(m.string(), "one_zero", std::nullopt, std::nullopt, out.string()); }),
              kExitOk);
    const auto j = Json::parse(slurp(out));
    EXPECT_EQ(j.at("one_zero").at("verdict"), c.verdict);
    EXPECT_FALSE(j.contains("zero_one"));
    if (std::string(c.verdict) == "holds") EXPECT_TRUE(j.at("one_zero").at("finsler_mu").is_array());
    if (std::string(c.verdict) == "fails") EXPECT_TRUE(j.at("one_zero").at("witness").is_array());
  }
}

TEST_F(CliTest, CheckConditionRejectsDimensionMismatch) {
  const auto m = write("m.json", R"({"A1": [[1.0]], "A2": [[1.0, 0.0], [0.0, 1.0]]})");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(guarded([&] { return cmd_check_condition(m.string(), "both", std::nullopt, std::nullopt,
                                                      (dir_ / "c.json").string()); }),
            kExitUsage);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, SweepStableSwitchedHasShrinkingGaps) {
  auto j = Json::parse(slurp(kSpecs / "switched_certified.json"));
  j["certify"]["enabled"] = false;
  const auto spec = write("spec.json", j.dump());
  ASSERT_EQ(guarded([&] { return cmd_sweep(spec.string(), (dir_ / "out").string(), 1); }), kExitOk);
  const auto rows = csv_rows(slurp(dir_ / "out" / "sweep.csv"));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0][1], "tau_1");
  std::vector<double> gaps;
  for (std::size_t r = 2; r < rows.size(); ++r) gaps.push_back(std::abs(std::stod(rows[r][1]) - std::stod(rows[r - 1][1])));
  for (std::size_t k = 0; k + 1 < gaps.size(); ++k) EXPECT_LT(gaps[k + 1], gaps[k]);
}

TEST_F(CliTest, SweepZeroStateIsFlat) {
  ASSERT_EQ(guarded([&] { return cmd_sweep((kSpecs / "switched_zero_state.json").string(), (dir_ / "out").string(), 1); }),
            kExitOk);
  const auto j = Json::parse(slurp(dir_ / "out" / "sweep.json"));
  for (const auto& rec : j.at("records")) {
    EXPECT_EQ(rec.at("cost"), Json(0.0));
    EXPECT_EQ(rec.at("flat_objective"), Json(true));
  }
  const auto c = Json::parse(slurp(dir_ / "out" / "certification.json"));
  EXPECT_EQ(c.at("certified"), Json(true));
}

TEST_F(CliTest, SweepNpiReportsArcColumns) {
  auto j = Json::parse(slurp(kSpecs / "sir_npi.json"));
  j["certify"]["enabled"] = false;
  const auto spec = write("spec.json", j.dump());
  ASSERT_EQ(guarded([&] { return cmd_sweep(spec.string(), (dir_ / "out").string(), 1); }), kExitOk);
  const auto rows = csv_rows(slurp(dir_ / "out" / "sweep.csv"));
  ASSERT_GE(rows.size(), 4u);
  const auto& h = rows[0];
  ASSERT_EQ(h[h.size() - 2], "arc3_mode");
  ASSERT_EQ(h.back(), "max_arc_dev");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_EQ(rows[r][h.size() - 2], "feedback_keep_iM");
    EXPECT_LT(std::stod(rows[r].back()), 1e-4);
  }
}

TEST_F(CliTest, SolveSwitchedWritesArtifacts) {
  ASSERT_EQ(guarded([&] { return cmd_solve((kSpecs / "switched_certified.json").string(), (dir_ / "out").string()); }),
            kExitOk);
  for (const char* f : {"solution.json", "control.json", "trajectory.csv"}) EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  const auto j = Json::parse(slurp(dir_ / "out" / "solution.json"));
  EXPECT_EQ(j.at("condition").at("verdict"), "holds");
}

TEST_F(CliTest, GammaProbeWritesReport) {
  ASSERT_EQ(guarded([&] { return cmd_gamma_probe((kSpecs / "gamma_switched.json").string(), (dir_ / "out").string()); }),
            kExitOk);
  const auto j = Json::parse(slurp(dir_ / "out" / "gamma.json"));
  EXPECT_TRUE(j.contains("closure"));
  EXPECT_TRUE(j.contains("weak_star"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "gamma.csv"));
}

TEST_F(CliTest, SirCommandsWriteReports) {
  ASSERT_EQ(guarded([&] { return cmd_sir_vacc((kSpecs / "sir_vacc.json").string(), (dir_ / "v").string()); }), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "v" / "vaccination.json"));
  ASSERT_EQ(guarded([&] { return cmd_sir_npi((kSpecs / "sir_npi.json").string(), (dir_ / "n").string()); }), kExitOk);
  const auto j = Json::parse(slurp(dir_ / "n" / "npi.json"));
  EXPECT_TRUE(j.dump().find("formula_as_printed") != std::string::npos);
}

TEST(Jobs, FlagOverridesEnvironment) {
  EXPECT_EQ(resolve_jobs(3), 3u);
  EXPECT_GE(resolve_jobs(std::nullopt), 1u);
}
