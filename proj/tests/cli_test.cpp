#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spcp/cli.hpp"

using namespace spcp;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spcp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string scenario(const std::string& name) const {
    return std::string(SPCP_SCENARIO_DIR) + "/" + name + ".scn";
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ValidateGoodFile) {
  const auto r = cli({"validate", scenario("example1")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::is_empty(dir_));
  EXPECT_NE(r.out.find("valid"), std::string::npos);
}

TEST_F(CliTest, ValidateBadFile) {
  const auto bad = dir_ / "bad.scn";
  std::ofstream(bad) << slurp(scenario("example1")) << "u_gate.active_fraction = 1.3\n";
  const auto r = cli({"validate", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: config: ", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("u_gate.active_fraction"), std::string::npos);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(CliTest, MissingFileIsIoError) {
  const auto r = cli({"validate", (dir_ / "nope.scn").string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.err.rfind("error: io: ", 0), 0u) << r.err;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"run"}).code, 2);
  EXPECT_EQ(cli({"run", "builtin:example9"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliTest, RunNoSyncHasZeroUColumn) {
  const auto r = cli({"run", "builtin:example1", "--no-sync", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto tr = load_trace_csv(dir_ / "example1_nosync.csv");
  EXPECT_EQ(tr.rows(), 20001u);
  for (double u : tr.column("u")) ASSERT_EQ(u, 0.0);
}

TEST_F(CliTest, DemoWritesArtifactsDeterministically) {
  const auto a = dir_ / "a";
  const auto b = dir_ / "b";
  const auto r = cli({"demo", "example1", "--out", a.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto* f : {"example1_sync.csv", "example1_nosync.csv", "example1_metrics.txt"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_NE(r.out.find("nosync.max_jump="), std::string::npos);
  ASSERT_EQ(cli({"demo", "example1", "--out", b.string()}).code, 0);
  for (const auto* f : {"example1_sync.csv", "example1_nosync.csv", "example1_metrics.txt"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST_F(CliTest, CompareThenMetricsFromFile) {
  ASSERT_EQ(cli({"compare", scenario("example2b"), "--out", dir_.string()}).code, 0);
  const auto report = slurp(dir_ / "example2b_metrics.txt");
  EXPECT_NE(report.find("sync.epoch2.itae="), std::string::npos);

  const auto r = cli({"metrics", (dir_ / "example2b_sync.csv").string(), "--scenario",
                      scenario("example2b")});
  ASSERT_EQ(r.code, 0) << r.err;
  // The standalone score of the synced trace matches the sync block of the report.
  const auto pos = report.find("sync.epoch2.itae=");
  const auto value = report.substr(pos + 5, report.find('\n', pos) - pos - 5);
  EXPECT_NE(r.out.find("\n" + value + "\n"), std::string::npos) << value;
}

TEST_F(CliTest, MetricsRejectsShapeMismatch) {
  ASSERT_EQ(cli({"run", "builtin:example1", "--out", dir_.string()}).code, 0);
  const auto one_path = dir_ / "one.scn";
  std::ofstream(one_path) << "plant1.num = 1\nplant1.den = 1, 1\npath1.setpoint = 1\n"
                             "path1.measurement = 1\npath1.kp = 1\npath1.ki = 1\n"
                             "w_gate.period = 50\nw_gate.active_fraction = 1\n"
                             "sim.dt = 0.001\nsim.t_end = 200\n";
  const auto r = cli({"metrics", (dir_ / "example1_sync.csv").string(), "--scenario",
                      one_path.string()});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, DivergenceIsNumericFailure) {
  const auto path = dir_ / "unstable.scn";
  std::ofstream(path) << "plant1.num = 1\nplant1.den = -1, 1\npath1.setpoint = 0\n"
                         "path1.measurement = 1\npath1.num = 0\npath1.den = 1\n"
                         "w_gate.period = 50\nw_gate.active_fraction = 1\n"
                         "sim.dt = 0.001\nsim.t_end = 100\ninit.plant1 = 1\n";
  const auto r = cli({"run", path.string(), "--out", dir_.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error: numeric: ", 0), 0u) << r.err;
}

TEST_F(CliTest, UnwritableOutputIsIoError) {
  const auto blocker = dir_ / "file";
  std::ofstream(blocker) << "x";
  const auto r = cli({"run", "builtin:example1", "--out", (blocker / "sub").string()});
  EXPECT_EQ(r.code, 4) << r.err;
}
