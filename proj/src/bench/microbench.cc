#include "streamlab/bench/microbench.h"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "streamlab/runtime/simulator.h"
#include "streamlab/runtime/state.h"
#include "streamlab/shuffle/partitioner.h"

namespace streamlab::bench {

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
MicroResult Measure(const std::string& name, const std::string& param, std::int64_t ops, int reps, Fn&& body) {
  MicroResult r{name, param, ops, {}, 0, 0};
  for (int i = 0; i < reps; ++i) {
    auto t0 = Clock::now();
    body();
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    r.ops_per_sec.push_back(static_cast<double>(ops) / std::max(secs, 1e-9));
  }
  double sum = 0;
  for (double v : r.ops_per_sec) sum += v;
  r.mean = sum / reps;
  double var = 0;
  for (double v : r.ops_per_sec) var += (v - r.mean) * (v - r.mean);
  r.cv = reps > 1 ? std::sqrt(var / (reps - 1)) / r.mean : 0;
  return r;
}

std::int64_t Scaled(double base, double scale) { return std::max<std::int64_t>(1, std::llround(base * scale)); }

volatile std::uint64_t g_sink = 0;

}  // namespace

std::vector<MicroResult> RunMicrobench(const MicroOptions& opts) {
  std::vector<MicroResult> out;
  std::mt19937_64 rng(opts.seed);

  // Keyed window-count updates.
  const std::int64_t state_ops = Scaled(1e6, opts.scale);
  for (std::uint64_t space : opts.key_spaces) {
    std::vector<std::uint64_t> keys(static_cast<std::size_t>(state_ops));
    std::uniform_int_distribution<std::uint64_t> pick(0, space - 1);
    for (auto& k : keys) k = pick(rng);
    out.push_back(Measure("state_store", "keys=" + std::to_string(space), state_ops, opts.reps, [&] {
      runtime::OperatorState st;
      for (std::uint64_t k : keys) ++st.windows[{0, k}];
      g_sink = g_sink + static_cast<std::uint64_t>(st.KeyCount());
    }));
  }

  // Routing decisions per strategy.
  const std::int64_t route_ops = Scaled(2e6, opts.scale);
  std::vector<std::pair<std::string, shuffle::ShuffleStrategy>> strategies{
      {"rebalance", shuffle::ShuffleStrategy::Rebalance()},
      {"keyhash", shuffle::ShuffleStrategy::KeyHash()},
      {"backlog", shuffle::ShuffleStrategy::BacklogAware()},
      {"weakhash", shuffle::ShuffleStrategy::WeakHash(2)}};
  for (auto& [name, s] : strategies) {
    out.push_back(Measure("routing", name, route_ops, opts.reps, [&, s = s] {
      shuffle::RouteContext ctx;
      ctx.up = 8;
      ctx.down = 64;
      ctx.backlog.assign(64, 0);
      ctx.load.assign(64, 0.0);
      std::uint64_t acc = 0;
      for (std::int64_t i = 0; i < route_ops; ++i) {
        int d = shuffle::Route(s, ctx, static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ULL);
        ctx.backlog[d] = (ctx.backlog[d] + 1) & 31;
        acc += static_cast<std::uint64_t>(d);
      }
      g_sink = g_sink + acc;
    }));
  }

  // Event scheduler: 64 self-rescheduling chains.
  const std::int64_t events = Scaled(1e6, opts.scale);
  out.push_back(Measure("scheduler", "chains=64", events, opts.reps, [&] {
    runtime::Simulator sim;
    std::int64_t left = events;
    std::function<void(SimTime)> tick = [&](SimTime step) {
      if (--left <= 0) return;
      sim.ScheduleAfter(step, [&tick, step] { tick(step); });
    };
    for (int c = 0; c < 64; ++c) {
      SimTime step = 1000 + c * 7;
      sim.Schedule(0, [&tick, step] { tick(step); });
    }
    sim.RunUntil(kHour * 1000);
    g_sink = g_sink + sim.processed();
  }));
  return out;
}

nlohmann::json MicroToJson(const std::vector<MicroResult>& results, const MicroOptions& opts) {
  nlohmann::json j;
  j["reps"] = opts.reps;
  j["scale"] = opts.scale;
  j["results"] = nlohmann::json::array();
  for (const auto& r : results) {
    j["results"].push_back({{"name", r.name},
                            {"param", r.param},
                            {"ops", r.ops},
                            {"ops_per_sec", r.ops_per_sec},
                            {"mean_ops_per_sec", r.mean},
                            {"cv", r.cv}});
  }
  return j;
}

std::string MicroTable(const std::vector<MicroResult>& results) {
  std::ostringstream s;
  s << std::left << std::setw(12) << "bench" << std::setw(16) << "param" << std::right << std::setw(16)
    << "mean ops/s" << std::setw(8) << "cv" << "\n";
  for (const auto& r : results) {
    s << std::left << std::setw(12) << r.name << std::setw(16) << r.param << std::right << std::setw(16)
      << std::fixed << std::setprecision(0) << r.mean << std::setw(8) << std::setprecision(3) << r.cv << "\n";
  }
  return s.str();
}

}  // namespace streamlab::bench
