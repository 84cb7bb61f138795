#include <gtest/gtest.h>

#include <map>

#include <json.hpp>

#include "streamlab/bench/config.h"
#include "streamlab/bench/metrics.h"
#include "streamlab/bench/runner.h"
#include "streamlab/chaos/fault_plan.h"

using namespace streamlab;
using namespace streamlab::chaos;
using nlohmann::json;

namespace {

// Records calls; events run in time order when Drain() is called.
class FakeSurface : public FaultSurface {
 public:
  std::multimap<SimTime, std::function<void()>> events;
  std::vector<int> killed;
  int jm_kills = 0;
  std::map<int, double> cpu;
  std::map<std::string, bool> stores{{"zookeeper", true}, {"hdfs", true}, {"checkpoint", true}};
  std::pair<double, SimTime> slow{0, 0};
  std::map<std::pair<std::string, std::string>, std::pair<SimTime, double>> net;
  std::vector<std::pair<SimTime, std::string>> trace;
  SimTime now = 0;

  void Drain(SimTime until) {
    while (!events.empty() && events.begin()->first <= until) {
      auto it = events.begin();
      now = it->first;
      auto fn = std::move(it->second);
      events.erase(it);
      fn();
    }
  }

  void ScheduleFault(SimTime at, std::function<void()> fn) override { events.emplace(at, std::move(fn)); }
  std::uint64_t ChaosSeed() const override { return 42; }
  int TmCount() const override { return 4; }
  std::vector<TmId> WorkerTms() const override { return {TmId{0}, TmId{1}, TmId{2}, TmId{3}}; }
  bool OperatorExists(const std::string& op) const override { return op == "sink"; }
  std::vector<TmId> TmsHostingOp(const std::string&) const override { return {TmId{2}, TmId{3}}; }
  bool EdgeExists(const std::string& a, const std::string& b) const override { return a == "src" && b == "sink"; }
  bool StoreExists(const std::string& s) const override { return stores.count(s) > 0; }
  void KillTm(TmId tm) override { killed.push_back(Value(tm)); }
  void KillJm() override { ++jm_kills; }
  std::pair<double, SimTime> StoreSlow() const override { return slow; }
  void SetStoreSlow(double p, SimTime d) override { slow = {p, d}; }
  bool StoreAvailable(const std::string& s) const override { return stores.at(s); }
  void SetStoreAvailable(const std::string& s, bool up) override {
    stores[s] = up;
    trace.emplace_back(now, s + (up ? " up" : " down"));
  }
  double CpuFactor(TmId tm) const override { return cpu.count(Value(tm)) ? cpu.at(Value(tm)) : 1.0; }
  void SetCpuFactor(TmId tm, double f) override { cpu[Value(tm)] = f; }
  std::pair<SimTime, double> NetDelay(const std::string& a, const std::string& b) const override {
    auto it = net.find({a, b});
    return it == net.end() ? std::pair<SimTime, double>{0, 1.0} : it->second;
  }
  void SetNetDelay(const std::string& a, const std::string& b, SimTime d, double c) override { net[{a, b}] = {d, c}; }
};

bench::MetricsReport RunJob(const json& doc) {
  auto cfg = bench::ResolveConfig(doc);
  auto rt = bench::Prepare(cfg);
  bool done = rt->RunToCompletion(cfg.max_time);
  return bench::Collect(*rt, done, bench::DefaultCollect(cfg));
}

json Ds(json faults) {
  return {{"name", "chaos"},
          {"seed", 3},
          {"workload", {{"kind", "ds"}, {"parallelism", 4}, {"rate", 100}, {"duration_s", 40}}},
          {"cluster", {{"tms", 4}, {"slots_per_tm", 2}}},
          {"checkpoint", {{"interval_s", 5}}},
          {"faults", std::move(faults)}};
}

}  // namespace

TEST(FaultPlan, ParsesAndSortsByTime) {
  auto plan = LoadPlan(json{{"seed", 9},
                            {"faults",
                             {{{"at", "1m"}, {"kind", "kill_jm"}},
                              {{"at", 5}, {"kind", "kill_tm"}, {"target", {{"tm", 2}}}},
                              {{"at", "10s"}, {"kind", "store_down"}, {"store", "hdfs"}, {"duration", "3s"}}}}});
  ASSERT_EQ(plan.faults.size(), 3u);
  EXPECT_EQ(plan.seed, 9u);
  EXPECT_EQ(plan.faults[0].kind, FaultKind::KillTm);
  EXPECT_EQ(plan.faults[0].at, 5 * kSecond);
  EXPECT_EQ(plan.faults[1].duration, 3 * kSecond);
  EXPECT_EQ(plan.faults[2].at, kMinute);
  auto again = LoadPlan(PlanToJson(plan));
  EXPECT_EQ(PlanToJson(again), PlanToJson(plan));
}

TEST(FaultPlan, ErrorsCarryLocation) {
  try {
    LoadPlan(json::array({{{"at", 1}, {"kind", "kill_jm"}}, {{"at", 2}, {"kind", "melt"}}}));
    FAIL() << "expected PlanError";
  } catch (const PlanError& e) {
    EXPECT_EQ(e.location(), "$[1]");
  }
  try {
    LoadPlan(json{{"faults", {{{"kind", "kill_jm"}}}}});
    FAIL() << "expected PlanError";
  } catch (const PlanError& e) {
    EXPECT_EQ(e.location(), "$.faults[0]");
  }
  EXPECT_THROW(LoadPlan(json::array({{{"at", -1}, {"kind", "kill_jm"}}})), PlanError);
  EXPECT_THROW(LoadPlan(json::array({{{"at", 1}, {"kind", "kill_tm"}}})), PlanError);
  EXPECT_THROW(LoadPlan(json::array({{{"at", 1}, {"kind", "slow_store"}, {"p_slow", 2}}})), PlanError);
  EXPECT_THROW(LoadPlanFile("/nonexistent/plan.json"), ConfigError);
}

TEST(FaultPlan, ArmSkipsUnresolvableTargets) {
  FakeSurface s;
  std::vector<std::string> warnings;
  auto plan = LoadPlan(json::array({{{"at", 1}, {"kind", "kill_tm"}, {"target", {{"tm", 9}}}},
                                    {{"at", 1}, {"kind", "kill_tm"}, {"target", {{"hosting_op", "nope"}}}},
                                    {{"at", 1}, {"kind", "store_down"}, {"store", "redis"}},
                                    {{"at", 1}, {"kind", "kill_tm"}, {"target", {{"hosting_op", "sink"}}}}}));
  EXPECT_EQ(Arm(plan, s, &warnings), 1);
  EXPECT_EQ(warnings.size(), 3u);
  EXPECT_NE(warnings[0].find("$[0]"), std::string::npos);
  s.Drain(kMinute);
  EXPECT_EQ(s.killed, (std::vector<int>{2, 3}));
}

TEST(FaultPlan, TimedFaultsRevert) {
  FakeSurface s;
  s.cpu[1] = 2.0;
  auto plan = LoadPlan(json::array(
      {{{"at", 10}, {"kind", "cpu_slow"}, {"target", {{"tm", 1}}}, {"factor", 5}, {"duration", "20s"}},
       {{"at", 10}, {"kind", "store_down"}, {"store", "zookeeper"}, {"duration", "5s"}},
       {{"at", 12}, {"kind", "slow_store"}, {"p_slow", 0.5}, {"delay", "1s"}, {"duration", "1s"}},
       {{"at", 12}, {"kind", "net_delay"}, {"edge", {{"from", "src"}, {"to", "sink"}}}, {"added", "50ms"}}}));
  ASSERT_EQ(Arm(plan, s), 4);
  s.Drain(12 * kSecond);
  EXPECT_DOUBLE_EQ(s.CpuFactor(TmId{1}), 10.0);
  EXPECT_FALSE(s.stores["zookeeper"]);
  EXPECT_DOUBLE_EQ(s.slow.first, 0.5);
  s.Drain(kMinute);
  EXPECT_DOUBLE_EQ(s.CpuFactor(TmId{1}), 2.0);
  EXPECT_TRUE(s.stores["zookeeper"]);
  EXPECT_DOUBLE_EQ(s.slow.first, 0.0);
  EXPECT_EQ(s.NetDelay("src", "sink").first, 50 * kMillisecond);  // permanent
  ASSERT_EQ(s.trace.size(), 2u);
  EXPECT_EQ(s.trace[1].first, 15 * kSecond);
}

TEST(FaultPlan, RandomTargetIsSeeded) {
  auto pick = [](std::uint64_t seed) {
    FakeSurface s;
    auto plan = LoadPlan(json{{"seed", seed}, {"faults", {{{"at", 1}, {"kind", "kill_tm"}, {"target", "random"}}}}});
    Arm(plan, s);
    s.Drain(kMinute);
    return s.killed;
  };
  EXPECT_EQ(pick(1), pick(1));
  EXPECT_EQ(pick(1).size(), 1u);
}

TEST(Chaos, SingleKillGivesOneRecovery) {
  auto r = RunJob(Ds(json::array({{{"at", 20}, {"kind", "kill_tm"}, {"target", {{"tm", 3}}}}})));
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.recoveries.size(), 1u);
  EXPECT_EQ(r.recoveries[0].time, 20 * kSecond);
}

TEST(Chaos, JmLossWithHealthyStoresKeepsJobs) {
  auto r = RunJob(Ds(json::array({{{"at", 15}, {"kind", "kill_jm"}}})));
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.terminations, 0);
  EXPECT_EQ(r.leader_changes, 1);
}

TEST(Chaos, CpuSlowBuildsBacklog) {
  json doc = Ds(json::array({{{"at", 5}, {"kind", "cpu_slow"}, {"target", {{"tm", 3}}}, {"factor", 200}}}));
  doc["workload"]["sink_us"] = 2000;
  json clean = doc;
  clean["faults"] = json::array();
  auto slow = RunJob(doc);
  auto base = RunJob(clean);
  std::int64_t peak_slow = 0, peak_base = 0;
  for (auto b : slow.backlog) peak_slow = std::max(peak_slow, b);
  for (auto b : base.backlog) peak_base = std::max(peak_base, b);
  EXPECT_GT(peak_slow, 10 * std::max<std::int64_t>(peak_base, 1));
}
