#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "streamlab/bench/config.h"
#include "streamlab/bench/metrics.h"
#include "streamlab/bench/microbench.h"
#include "streamlab/bench/report_io.h"
#include "streamlab/bench/runner.h"
#include "streamlab/bench/slo.h"

using namespace streamlab;
using namespace streamlab::bench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path TempDir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("streamlab_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json Small() {
  return {{"name", "small"},
          {"seed", 1},
          {"workload", {{"kind", "ds"}, {"parallelism", 2}, {"rate", 50}, {"duration_s", 10}}},
          {"cluster", {{"tms", 2}, {"slots_per_tm", 2}}}};
}

void WriteFile(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST(Config, SetPathParsesJsonOrString) {
  json doc = json::object();
  SetPath(doc, "a.b.c", "3");
  SetPath(doc, "a.flag", "true");
  SetPath(doc, "a.name", "region");
  SetPath(doc, "a.list", "[1,2]");
  EXPECT_EQ(doc["a"]["b"]["c"], 3);
  EXPECT_EQ(doc["a"]["flag"], true);
  EXPECT_EQ(doc["a"]["name"], "region");
  EXPECT_EQ(doc["a"]["list"], json::array({1, 2}));
  EXPECT_EQ(SplitOverride("x.y=1=2"), (std::pair<std::string, std::string>{"x.y", "1=2"}));
  EXPECT_THROW(SplitOverride("novalue"), ConfigError);
}

TEST(Config, SeedIsRequired) {
  json doc = Small();
  doc.erase("seed");
  EXPECT_THROW(ResolveConfig(doc), ConfigError);
}

TEST(Config, MissingFaultFileIsConfigError) {
  json doc = Small();
  doc["faults"] = "does_not_exist.json";
  EXPECT_THROW(ResolveConfig(doc, "/nonexistent"), ConfigError);
}

TEST(Config, SingleTaskWithFullCompletenessRejected) {
  json doc = Small();
  doc["recovery"] = {{"strategy", "single_task"}, {"completeness", "full"}};
  EXPECT_THROW(ResolveConfig(doc), ConfigError);
  doc["recovery"]["completeness"] = "partial";
  EXPECT_NO_THROW(ResolveConfig(doc));
}

TEST(Config, ResolvedDocReproducesTheRun) {
  auto dir = TempDir("cfg");
  WriteFile(dir / "plan.json", R"([{"at": 4, "kind": "kill_tm", "target": {"tm": 1}}])");
  json doc = Small();
  doc["faults"] = "plan.json";
  WriteFile(dir / "run.json", doc.dump());
  auto cfg = LoadRunConfig((dir / "run.json").string(), {"workload.rate=80", "checkpoint.interval_s=2"});
  EXPECT_EQ(cfg.workload.rate.front().rate, 80.0);
  EXPECT_EQ(cfg.faults.faults.size(), 1u);
  EXPECT_TRUE(cfg.doc["faults"].is_array() || cfg.doc["faults"].is_object());

  auto again = ResolveConfig(cfg.doc);
  EXPECT_EQ(again.doc, cfg.doc);
  EXPECT_EQ(SummaryJson(bench::Run(cfg)).dump(), SummaryJson(bench::Run(again)).dump());
  fs::remove_all(dir);
}

TEST(Slo, VerdictFlagsEachBound) {
  MetricsReport r;
  r.latency_p99_outside_recovery = 500 * kMillisecond;
  runtime::RecoveryLogEntry rec;
  rec.recovery_time = 3 * kSecond;
  r.recoveries.push_back(rec);

  SloTarget t{recovery::Completeness::Full, kSecond, 10 * kSecond, 0};
  EXPECT_TRUE(EvaluateSlo(r, t).overall);

  t.tau_max = kSecond;
  auto v = EvaluateSlo(r, t);
  EXPECT_FALSE(v.recovery_ok);
  EXPECT_TRUE(v.latency_ok);
  EXPECT_FALSE(v.overall);
  EXPECT_NE(v.explanation.find("recovery"), std::string::npos);

  r.records_dropped = 5;
  t = {recovery::Completeness::Partial, kSecond, 10 * kSecond, 10};
  EXPECT_TRUE(EvaluateSlo(r, t).completeness_ok);
  t.gamma = recovery::Completeness::Full;
  EXPECT_FALSE(EvaluateSlo(r, t).completeness_ok);

  r.valid = false;
  EXPECT_THROW(EvaluateSlo(r, t), VerdictError);
  EXPECT_THROW(SloPreset("nope"), ConfigError);
}

TEST(Grid, ExpandsCartesianProduct) {
  auto a = ParseGridFlag("checkpoint.mode=[\"global\",\"region\"]");
  auto b = ParseGridFlag("workload.rate=10,20");
  ASSERT_EQ(a.values.size(), 2u);
  EXPECT_EQ(b.values, (std::vector<json>{10, 20}));
  json base = Small();
  base["grid"] = {{"x", {1}}};
  auto cells = ExpandGrid(base, {a, b});
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].label, "checkpoint.mode=global,workload.rate=10");
  EXPECT_EQ(cells[3].doc["checkpoint"]["mode"], "region");
  EXPECT_EQ(cells[3].doc["workload"]["rate"], 20);
  EXPECT_FALSE(cells[0].doc.contains("grid"));
  EXPECT_EQ(ExpandGrid(Small(), {}).size(), 1u);
  EXPECT_EQ(GridFromJson(json{{"a.b", {1, 2, 3}}}).front().values.size(), 3u);
}

TEST(Grid, SweepWritesCellsAndSummary) {
  auto dir = TempDir("sweep");
  std::ostringstream log;
  SweepOptions o;
  o.out_dir = dir.string();
  o.parallel = 2;
  int rc = RunSweep(Small(), {ParseGridFlag("workload.rate=20,40")}, o, log);
  EXPECT_EQ(rc, 0);
  EXPECT_TRUE(fs::exists(dir / "cell_000" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "cell_001" / "summary.json"));
  std::ifstream csv(dir / "summary.csv");
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 3);

  // A broken cell is reported, the sweep still completes.
  auto bad = RunSweep(Small(), {ParseGridFlag("workload.parallelism=2,0")}, o, log);
  EXPECT_EQ(bad, 1);
  fs::remove_all(dir);
}

TEST(Report, CompareExitCodes) {
  auto dir = TempDir("report");
  std::ostringstream out, err;
  EXPECT_EQ(CompareReports({}, false, out, err), 2);

  auto good = dir / "good";
  RunAndWrite(ResolveConfig(Small()), good.string());
  fs::create_directories(dir / "bad");
  WriteFile(dir / "bad" / "summary.json", "{not json");
  EXPECT_EQ(CompareReports({good.string()}, false, out, err), 0);
  EXPECT_NE(out.str().find("|"), std::string::npos);
  out.str("");
  EXPECT_EQ(CompareReports({good.string(), (dir / "bad").string()}, true, out, err), 1);
  EXPECT_FALSE(err.str().empty());
  EXPECT_THROW(ReadReport((dir / "missing").string()), ConfigError);
  fs::remove_all(dir);
}

TEST(Report, RunAndWriteExitCodes) {
  auto dir = TempDir("exit");
  json doc = Small();
  doc["slo"] = {{"preset", "warehouse"}};
  auto ok = RunAndWrite(ResolveConfig(doc), (dir / "ok").string());
  EXPECT_EQ(ok.exit_code, kExitOk);
  ASSERT_TRUE(ok.verdict.has_value());
  EXPECT_TRUE(fs::exists(dir / "ok" / "verdict.json"));
  EXPECT_TRUE(fs::exists(dir / "ok" / "resolved_config.json"));

  doc["faults"] = json::array({{{"at", 3}, {"kind", "kill_tm"}, {"target", {{"tm", 1}}}}});
  doc["slo"] = {{"preset", "warehouse"}, {"tau_max_s", 0.001}};
  auto bad = RunAndWrite(ResolveConfig(doc), (dir / "bad").string());
  EXPECT_EQ(bad.exit_code, kExitViolation);
  EXPECT_FALSE(bad.verdict->recovery_ok);
  fs::remove_all(dir);
}

TEST(Microbench, ProducesStableRates) {
  MicroOptions o;
  o.reps = 3;
  o.scale = 0.05;
  o.key_spaces = {1000};
  auto res = RunMicrobench(o);
  ASSERT_FALSE(res.empty());
  for (const auto& r : res) {
    EXPECT_EQ(r.ops_per_sec.size(), 3u);
    EXPECT_GT(r.mean, 0);
    EXPECT_GE(r.cv, 0);
  }
  auto j = MicroToJson(res, o);
  EXPECT_EQ(j["results"].size(), res.size());
  EXPECT_FALSE(MicroTable(res).empty());
}
