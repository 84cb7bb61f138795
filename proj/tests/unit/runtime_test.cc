#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include <json.hpp>

#include "streamlab/bench/config.h"
#include "streamlab/bench/metrics.h"
#include "streamlab/bench/runner.h"
#include "streamlab/runtime/channel.h"
#include "streamlab/runtime/simulator.h"
#include "streamlab/runtime/source_log.h"

using namespace streamlab;
using namespace streamlab::runtime;
using nlohmann::json;

namespace {

struct Ran {
  std::unique_ptr<JobRuntime> rt;
  bench::MetricsReport report;
};

Ran RunDoc(const json& doc) {
  auto cfg = bench::ResolveConfig(doc);
  Ran r;
  r.rt = bench::Prepare(cfg);
  bool done = r.rt->RunToCompletion(cfg.max_time);
  r.report = bench::Collect(*r.rt, done, bench::DefaultCollect(cfg));
  return r;
}

json DsDoc(int p, double rate, int seconds) {
  return {{"name", "t"},
          {"seed", 5},
          {"workload", {{"kind", "ds"}, {"parallelism", p}, {"rate", rate}, {"duration_s", seconds}}},
          {"cluster", {{"tms", p}, {"slots_per_tm", 2}}},
          {"checkpoint", {{"interval_s", 5}}}};
}

}  // namespace

TEST(Simulator, RunsInTimeThenSchedulingOrder) {
  Simulator sim;
  std::vector<int> order;
  sim.Schedule(20, [&] { order.push_back(3); });
  sim.Schedule(10, [&] { order.push_back(1); });
  sim.Schedule(10, [&] { order.push_back(2); });
  sim.Schedule(10, [&] {
    order.push_back(4);
    // Same instant, scheduled later: runs after everything already queued at 10.
    sim.Schedule(10, [&] { order.push_back(5); });
  });
  EXPECT_EQ(sim.RunUntil(15), 4u);
  EXPECT_EQ(sim.now(), 15);
  sim.RunUntil(100);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 4, 5, 3}));
}

TEST(Simulator, DigestIsOrderSensitive) {
  auto digest = [](bool swap) {
    Simulator sim;
    sim.Schedule(swap ? 2 : 1, [] {});
    sim.Schedule(swap ? 1 : 2, [] {});
    sim.RunUntil(10);
    return sim.trace_digest();
  };
  EXPECT_EQ(digest(false), digest(false));
  EXPECT_NE(digest(false), digest(true));
}

TEST(Channel, CreditsAndFifoWake) {
  Channel ch(TaskId{0, 0}, TaskId{1, 0}, 2);
  std::vector<int> woke;
  auto waiter = [&](int id) { return Channel::Waiter{id, [&woke, id] { woke.push_back(id); }}; };
  Item rec;
  EXPECT_EQ(ch.Send(rec), SendOutcome::Enqueued);
  EXPECT_EQ(ch.Send(rec), SendOutcome::Enqueued);
  EXPECT_EQ(ch.credits(), 0);
  EXPECT_EQ(ch.Send(rec, waiter(7)), SendOutcome::Blocked);
  EXPECT_EQ(ch.Send(rec, waiter(8)), SendOutcome::Blocked);

  // Control items ignore credits but stay in order.
  Item barrier;
  barrier.kind = ItemKind::Barrier;
  EXPECT_EQ(ch.Send(barrier), SendOutcome::Enqueued);
  EXPECT_EQ(ch.size(), 3u);
  EXPECT_EQ(ch.backlog(), 2);

  for (int i = 0; i < 2; ++i) {
    std::optional<Channel::Waiter> w;
    ch.Pop(&w);
    ASSERT_TRUE(w.has_value());
    w->wake();
  }
  EXPECT_EQ(woke, (std::vector<int>{7, 8}));
  std::optional<Channel::Waiter> none;
  EXPECT_EQ(ch.Pop(&none).kind, ItemKind::Barrier);
  EXPECT_FALSE(none.has_value());
}

TEST(SourceLog, CountFollowsIntegratedRate) {
  SourceProfile p;
  p.steps = {{0, 800'000.0}};
  p.end = 10 * kSecond;
  SourceLog log(p, 1);
  EXPECT_EQ(log.size(), 8'000'000);
  EXPECT_EQ(log.CountBy(5 * kSecond), 4'000'000);

  SourceProfile steps;
  steps.steps = {{0, 100.0}, {10 * kSecond, 300.0}};
  steps.end = 20 * kSecond;
  SourceLog two(steps, 1);
  EXPECT_EQ(two.size(), 100 * 10 + 300 * 10);
  EXPECT_EQ(two.CountBy(10 * kSecond), 1000);
  for (std::int64_t i = 1; i < two.size(); ++i) ASSERT_LE(two.ArrivalTime(i - 1), two.ArrivalTime(i));
}

TEST(SourceLog, ZipfRankOneFrequency) {
  const std::uint64_t n = 1000;
  const double s = 1.1;
  double h = 0;
  for (std::uint64_t k = 1; k <= n; ++k) h += std::pow(static_cast<double>(k), -s);
  ZipfTable table(n, s);
  EXPECT_NEAR(table.Probability(0), 1.0 / h, 1e-9);

  SourceProfile p;
  p.steps = {{0, 100'000.0}};
  p.end = 2 * kSecond;
  p.zipf_s = s;
  p.key_space = n;
  SourceLog log(p, 3);
  std::int64_t top = 0;
  for (std::int64_t i = 0; i < log.size(); ++i) top += log.KeyOf(i) == 0;
  EXPECT_NEAR(static_cast<double>(top) / log.size(), 1.0 / h, 0.01);
}

TEST(SourceLog, KeysAreReplayable) {
  SourceProfile p;
  p.end = 5 * kSecond;
  SourceLog a(p, 9), b(p, 9);
  for (std::int64_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.KeyOf(i), b.KeyOf(i));
}

TEST(Engine, WindowCountMatchesRateTimesWindow) {
  // One key, two sources at 40/s each, 5 s windows: interior windows hold 400.
  json doc = {{"name", "win"},
              {"seed", 2},
              {"workload",
               {{"kind", "q12"},
                {"parallelism", 1},
                {"source_parallelism", 2},
                {"rate", 40},
                {"key_space", 1},
                {"window_s", 5},
                {"duration_s", 30}}},
              {"cluster", {{"tms", 2}, {"slots_per_tm", 4}}}};
  auto r = RunDoc(doc);
  ASSERT_TRUE(r.report.completed);
  ASSERT_EQ(r.report.output_ledger.size(), 1u);
  // Offset i arrives at (i+1)/r, so the first window is one short per source
  // and the final arrival lands on the 30 s boundary.
  std::map<std::int64_t, std::int64_t> windows;
  for (int src = 0; src < 2; ++src) {
    for (std::int64_t i = 0; i < 40 * 30; ++i) windows[(i + 1) * kSecond / 40 / (5 * kSecond)] += 1;
  }
  for (const auto& [w, c] : windows) {
    if (w > 0 && w < 6) EXPECT_EQ(c, 2 * 40 * 5);
  }
  const auto& e = r.report.output_ledger.begin()->second;
  EXPECT_EQ(e.records, static_cast<std::int64_t>(windows.size()));
  EXPECT_EQ(e.value_sum, 2 * 40 * 30);
}

TEST(Engine, DeterministicTraceAndConservation) {
  auto a = RunDoc(DsDoc(4, 200, 20));
  auto b = RunDoc(DsDoc(4, 200, 20));
  ASSERT_TRUE(a.report.completed);
  EXPECT_EQ(a.report.trace_digest, b.report.trace_digest);
  EXPECT_EQ(bench::SummaryJson(a.report).dump(), bench::SummaryJson(b.report).dump());
  EXPECT_TRUE(a.report.conservation.Balanced());
  EXPECT_EQ(a.report.source_records, 4 * 200 * 20);
  std::int64_t out = 0;
  for (const auto& [k, e] : a.report.output_ledger) out += e.records;
  EXPECT_EQ(out, 4 * 200 * 20);
}

TEST(Engine, RegionFailoverReplaysCheckpointAge) {
  const double rate = 100;
  json doc = DsDoc(2, rate, 40);
  doc["recovery"] = {{"strategy", "region_failover"}};
  doc["checkpoint"]["mode"] = "region";
  doc["faults"] = json::array({{{"at", "17300ms"}, {"kind", "kill_tm"}, {"target", {{"tm", 1}}}}});
  auto r = RunDoc(doc);
  ASSERT_TRUE(r.report.completed);
  ASSERT_EQ(r.report.recoveries.size(), 1u);
  const auto& rec = r.report.recoveries[0];

  SimTime last = -1;
  for (const auto& c : r.report.checkpoints) {
    if (c.success && c.trigger_time + c.duration <= rec.time) last = std::max(last, c.trigger_time);
  }
  ASSERT_GE(last, 0);
  const double age = ToSeconds(rec.time - last);
  const double detection = ToSeconds(r.rt->config().detection_latency);
  // Two single-source regions; sources may run ahead until detection.
  EXPECT_GE(rec.replayed, static_cast<std::int64_t>(2 * rate * age) - 2);
  EXPECT_LE(rec.replayed, static_cast<std::int64_t>(2 * rate * (age + detection)) + 2);
  EXPECT_EQ(r.report.records_dropped, 0);
  EXPECT_TRUE(r.report.conservation.Balanced());
}

TEST(Engine, SingleTaskDropsInboundDuringDowntime) {
  json doc = DsDoc(4, 100, 60);
  doc["workload"]["shuffle"] = "keyhash";
  doc["cluster"]["slots_per_tm"] = 1;
  doc["cluster"]["tms"] = 8;
  doc["recovery"] = {{"strategy", "single_task"}, {"completeness", "partial"}};
  json clean = doc;
  doc["faults"] = json::array({{{"at", 20}, {"kind", "kill_tm"}, {"target", {{"tm", 5}}}}});
  auto faulty = RunDoc(doc);
  auto base = RunDoc(clean);
  ASSERT_EQ(faulty.report.recoveries.size(), 1u);
  const double inbound = static_cast<double>(base.rt->consumed_by(TaskId{1, 1})) / 60.0;
  const double d = ToSeconds(faulty.report.recoveries[0].recovery_time);
  const double expect = inbound * d;
  EXPECT_GT(faulty.report.records_dropped, 0);
  EXPECT_NEAR(static_cast<double>(faulty.report.records_dropped), expect, 0.15 * expect + 5);
  EXPECT_EQ(faulty.report.duplicates, 0);
}

TEST(Engine, ActiveStandbySwitchesWithinDetection) {
  json doc = DsDoc(2, 100, 30);
  doc["recovery"] = {{"strategy", "region_failover"}, {"replication", "active_standby"}, {"standby_lag_records", 0}};
  json clean = doc;
  doc["faults"] = json::array({{{"at", 10}, {"kind", "kill_tm"}, {"target", {{"tm", 1}}}}});
  auto r = RunDoc(doc);
  auto base = RunDoc(clean);
  ASSERT_TRUE(r.report.completed);
  ASSERT_FALSE(r.report.recoveries.empty());
  for (const auto& rec : r.report.recoveries) {
    EXPECT_TRUE(rec.standby);
    EXPECT_LE(rec.recovery_time, r.rt->config().detection_latency + kMillisecond);
  }
  EXPECT_EQ(r.report.output_ledger, base.report.output_ledger);
}
