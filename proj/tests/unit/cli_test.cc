#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = STREAMLAB_CLI_PATH;
const std::string kConfig = std::string(STREAMLAB_SOURCE_DIR) + "/configs/q12_kill_tm.json";

int Cli(const std::string& args) {
  std::string cmd = "'" + kCli + "' " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path Scratch(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("streamlab_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, RunWritesReportAndSucceeds) {
  auto out = Scratch("run");
  ASSERT_EQ(Cli("run -c '" + kConfig + "' -o '" + out.string() + "'"), 0);
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  EXPECT_TRUE(fs::exists(out / "verdict.json"));

  // The resolved config alone reproduces the run.
  auto again = Scratch("rerun");
  ASSERT_EQ(Cli("run -c '" + (out / "resolved_config.json").string() + "' -o '" + again.string() + "'"), 0);
  EXPECT_EQ(Slurp(out / "summary.json"), Slurp(again / "summary.json"));
  fs::remove_all(out);
  fs::remove_all(again);
}

TEST(Cli, SloViolationExitsOne) {
  auto out = Scratch("slo");
  EXPECT_EQ(Cli("run -c '" + kConfig + "' --set slo.tau_max_s=0.001 -o '" + out.string() + "'"), 1);
  auto verdict = nlohmann::json::parse(Slurp(out / "verdict.json"));
  EXPECT_EQ(verdict["recovery_ok"], false);
  fs::remove_all(out);
}

TEST(Cli, ConfigErrorsExitTwo) {
  auto out = Scratch("bad");
  EXPECT_EQ(Cli("run -c '" + kConfig + "' --set workload.parallelism=0 -o '" + out.string() + "'"), 2);
  EXPECT_EQ(Cli("run -c /nonexistent/config.json"), 2);
  EXPECT_EQ(Cli("run"), 2);
  EXPECT_EQ(Cli("frobnicate"), 2);
  EXPECT_EQ(Cli("report"), 2);
  fs::remove_all(out);
}

TEST(Cli, SweepAndReport) {
  auto out = Scratch("sweep");
  ASSERT_EQ(Cli("sweep -c '" + kConfig + "' -g checkpoint.mode=global,region -j 2 -o '" + out.string() + "'"), 0);
  EXPECT_TRUE(fs::exists(out / "summary.csv"));
  EXPECT_EQ(Cli("report '" + (out / "cell_000").string() + "' '" + (out / "cell_001").string() + "'"), 0);
  EXPECT_EQ(Cli("report --csv '" + (out / "cell_000").string() + "' '" + (out / "nope").string() + "'"), 1);
  fs::remove_all(out);
}
