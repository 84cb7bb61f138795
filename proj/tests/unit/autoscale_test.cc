#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "streamlab/autoscale/autoscaler.h"
#include "streamlab/graph/graph.h"

using namespace streamlab;
using namespace streamlab::autoscale;

namespace {

graph::LogicalGraph Pipeline() {
  graph::LogicalGraph g;
  graph::OperatorSpec src{"src", graph::OperatorKind::Source, 2};
  graph::OperatorSpec map{"map", graph::OperatorKind::Filter, 2};
  graph::OperatorSpec sink{"sink", graph::OperatorKind::Sink, 2};
  map.selectivity = 0.5;
  g.Add(src).Add(map).Add(sink);
  g.Connect("src", "map", shuffle::ShuffleStrategy::Rebalance());
  g.Connect("map", "sink", shuffle::ShuffleStrategy::Rebalance());
  return g;
}

MetricWindow Fill(const std::vector<OperatorSample>& per_op, int window) {
  MetricWindow w(static_cast<int>(per_op.size()), window);
  for (int i = 0; i < window; ++i) {
    for (std::size_t op = 0; op < per_op.size(); ++op) w.Push(static_cast<int>(op), per_op[op]);
  }
  return w;
}

double Pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= a.size();
  mb /= b.size();
  double sab = 0, sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    sa += (a[i] - ma) * (a[i] - ma);
    sb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(sa * sb);
}

ScalingDecision Want(std::vector<int> t) {
  ScalingDecision d;
  d.target = std::move(t);
  return d;
}

}  // namespace

TEST(Smoother, TrueRateIsProcessedOverBusyPerInstance) {
  auto g = Pipeline();
  AutoscaleConfig cfg;
  Smoother sm;
  auto w = Fill({{1000, 1000, 0.2, 0}, {1000, 500, 0.5, 0}, {250, 250, 0.97, 0}}, 5);
  auto s = sm.Smooth(w, g, {2, 2, 2}, cfg);
  EXPECT_DOUBLE_EQ(s.true_rate[1], 500.0);  // 500 / 0.5 / 2
  // Above the saturation threshold busy counts as 1.
  EXPECT_DOUBLE_EQ(s.true_rate[2], 125.0);
  EXPECT_DOUBLE_EQ(s.input_rate[0], 1000.0);
}

TEST(Smoother, WindowMeanAndIdleFallback) {
  auto g = Pipeline();
  AutoscaleConfig cfg;
  Smoother sm;
  MetricWindow w(3, 2);
  w.Push(0, {900, 900, 0.1, 0});
  w.Push(0, {1100, 1100, 0.1, 0});
  for (int i = 0; i < 2; ++i) {
    w.Push(1, {100, 100, 0.25, 0});
    w.Push(2, {100, 100, 0.25, 0});
  }
  auto s = sm.Smooth(w, g, {2, 2, 2}, cfg);
  EXPECT_DOUBLE_EQ(s.input_rate[0], 1000.0);
  EXPECT_DOUBLE_EQ(s.true_rate[1], 200.0);

  // Zero busy with output: the previous signal is reused.
  auto idle = Fill({{1000, 1000, 0.1, 0}, {100, 100, 0.0, 0}, {0, 0, 0.0, 0}}, 2);
  auto s2 = sm.Smooth(idle, g, {2, 2, 2}, cfg);
  EXPECT_TRUE(s2.valid[1]);
  EXPECT_DOUBLE_EQ(s2.true_rate[1], 200.0);
  EXPECT_FALSE(s2.valid[2]);
}

TEST(Target, DemandPropagatesThroughSelectivity) {
  auto g = Pipeline();
  AutoscaleConfig cfg;
  cfg.beta = 1.0;
  Signals s;
  s.true_rate = {0, 250, 250};
  s.valid = {true, true, true};
  s.input_rate = {1000, 0, 0};
  s.mean_busy = {0, 0, 0};
  auto d = TargetParallelism(s, g, {2, 2, 2}, cfg);
  EXPECT_EQ(d.target[1], 4);  // ceil(1000 / 250)
  EXPECT_EQ(d.target[2], 2);  // ceil(1000 * 0.5 / 250)
  EXPECT_EQ(d.reasons[1], "up");
  EXPECT_EQ(d.reasons[2], "hold");

  cfg.beta = 1.2;
  d = TargetParallelism(s, g, {2, 2, 2}, cfg);
  EXPECT_EQ(d.target[1], 5);  // ceil(1200 / 250)
  EXPECT_EQ(d.target[2], 3);
  s.valid[2] = false;
  d = TargetParallelism(s, g, {2, 2, 2}, cfg);
  EXPECT_EQ(d.target[2], 2);
  EXPECT_EQ(d.reasons[2], "unscalable");
}

TEST(Target, TracksANoisyLoad) {
  auto g = Pipeline();
  AutoscaleConfig cfg;
  Smoother sm;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0, 0.03);
  std::vector<double> load, chosen;
  std::vector<int> p = {2, 2, 2};
  for (int step = 0; step < 200; ++step) {
    double rate = 1000 + 800 * std::sin(step / 15.0);
    MetricWindow w(3, 5);
    for (int i = 0; i < 5; ++i) {
      double r = rate * (1 + noise(rng));
      // 100 rec/s per map instance at full utilisation.
      double busy = std::min(1.0, r / (100.0 * p[1]));
      w.Push(0, {r, r, 0.1, 0});
      w.Push(1, {r, std::min(r, 100.0 * p[1]), busy, 0});
      w.Push(2, {r / 2, r / 2, 0.1, 0});
    }
    auto d = TargetParallelism(sm.Smooth(w, g, p, cfg), g, p, cfg);
    p = d.target;
    load.push_back(rate);
    chosen.push_back(p[1]);
  }
  EXPECT_GT(Pearson(load, chosen), 0.9);
}

TEST(SafetyGuard, CooldownFreezeAndStepLimit) {
  AutoscaleConfig cfg;
  cfg.cooldown = 300 * kSecond;
  cfg.max_step = 2.0;
  cfg.freeze = {{40 * kMinute, 50 * kMinute}};
  SafetyGuard guard(cfg);
  auto a = guard.GuardAndApply(Want({10}), {2}, 100, 0);
  EXPECT_EQ(a.kind, ApplyKind::Applied);
  EXPECT_EQ(a.parallelism, (std::vector<int>{4}));  // capped at 2x
  EXPECT_EQ(guard.GuardAndApply(Want({8}), {4}, 100, 10 * kSecond).reason, "probation");
  EXPECT_FALSE(guard.CheckProbation(100, 20 * kSecond).has_value());
  EXPECT_EQ(guard.GuardAndApply(Want({8}), {4}, 100, 100 * kSecond).reason, "cooldown");
  EXPECT_EQ(guard.GuardAndApply(Want({4}), {4}, 100, 100 * kSecond).kind, ApplyKind::Unchanged);

  // Downscale inside the freeze window is deferred, upscale goes through.
  EXPECT_EQ(guard.GuardAndApply(Want({2}), {4}, 100, 45 * kMinute).reason, "freeze");
  auto up = guard.GuardAndApply(Want({2, 6}), {4, 4}, 100, 45 * kMinute);
  EXPECT_EQ(up.kind, ApplyKind::Applied);
  EXPECT_EQ(up.parallelism, (std::vector<int>{4, 6}));
  EXPECT_TRUE(guard.InFreeze(24 * kHour + 41 * kMinute));
}

TEST(SafetyGuard, RollbackRestoresPriorAndOpensBreaker) {
  AutoscaleConfig cfg;
  cfg.cooldown = 0;
  cfg.breaker_k = 3;
  cfg.rho = 0.8;
  SafetyGuard guard(cfg);
  SimTime t = 0;
  std::vector<int> cur = {3, 5};
  for (int i = 0; i < 3; ++i) {
    auto a = guard.GuardAndApply(Want({6, 10}), cur, 1000, t);
    ASSERT_EQ(a.kind, ApplyKind::Applied);
    t += 20 * kSecond;
    auto rb = guard.CheckProbation(700, t);  // below 0.8 * 1000
    ASSERT_TRUE(rb.has_value());
    EXPECT_EQ(rb->kind, ApplyKind::RolledBack);
    EXPECT_EQ(rb->parallelism, cur);
    t += 10 * kSecond;
  }
  EXPECT_EQ(guard.consecutive_failures(), 3);
  EXPECT_EQ(guard.GuardAndApply(Want({6, 10}), cur, 1000, t).kind, ApplyKind::BreakerOpen);
  guard.ResetBreaker();
  EXPECT_EQ(guard.GuardAndApply(Want({6, 10}), cur, 1000, t).kind, ApplyKind::Applied);
}

TEST(SafetyGuard, HourlyRateLimit) {
  AutoscaleConfig cfg;
  cfg.cooldown = 0;
  cfg.probation_intervals = 0;
  cfg.max_changes_per_hour = 2;
  SafetyGuard guard(cfg);
  EXPECT_EQ(guard.GuardAndApply(Want({3}), {2}, 1, 0).kind, ApplyKind::Applied);
  guard.CheckProbation(1, 0);
  EXPECT_EQ(guard.GuardAndApply(Want({4}), {3}, 1, kMinute).kind, ApplyKind::Applied);
  guard.CheckProbation(1, kMinute);
  EXPECT_EQ(guard.GuardAndApply(Want({5}), {4}, 1, 2 * kMinute).reason, "rate_limit");
  EXPECT_EQ(guard.GuardAndApply(Want({5}), {4}, 1, kHour + kMinute).kind, ApplyKind::Applied);
}

TEST(AutoscaleConfig, JsonRoundTrip) {
  AutoscaleConfig c;
  c.enabled = true;
  c.cooldown = 42 * kSecond;
  c.freeze = {{kHour, 2 * kHour}};
  auto back = AutoscaleConfigFromJson(AutoscaleConfigToJson(c));
  EXPECT_EQ(AutoscaleConfigToJson(back), AutoscaleConfigToJson(c));
  EXPECT_EQ(back.cooldown, 42 * kSecond);
}
