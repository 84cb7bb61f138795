#include "streamlab/control/startup.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "streamlab/common/duration.h"

namespace streamlab::control {

namespace {
constexpr double kZ99 = 2.3263478740408408;
}

double TmStartupModel::mu() const { return std::log(static_cast<double>(p50)); }

double TmStartupModel::sigma() const {
  if (p99 <= p50) return 0.0;
  return (std::log(static_cast<double>(p99)) - std::log(static_cast<double>(p50))) / kZ99;
}

SimTime TmStartupModel::Sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> z(0.0, 1.0);
  double x = z(rng);
  return static_cast<SimTime>(std::llround(std::exp(mu() + sigma() * x)));
}

ClusterModel ClusterModel::Calibrated() {
  ClusterModel c;
  c.tms = 512;
  c.slots_per_tm = 2;
  c.spares = 5;
  c.rpc_a = 8 * kMillisecond;
  c.rpc_b = 1'224'600;  // 1.2246 ms
  c.parse_per_task = 300 * kMicrosecond;
  c.parse_per_edge_object = 15 * kMicrosecond;
  c.launch_interval = 450 * kMillisecond;
  c.startup.p50 = 800 * kMillisecond;
  c.startup.p99 = 5 * kSecond;
  return c;
}

ClusterModel ClusterModelFromJson(const nlohmann::json& j) {
  ClusterModel c;
  if (!j.is_object()) return c;
  c.tms = j.value("tms", c.tms);
  c.slots_per_tm = j.value("slots_per_tm", c.slots_per_tm);
  c.spares = j.value("spares", c.spares);
  if (j.contains("tm_startup_ms")) {
    const auto& s = j["tm_startup_ms"];
    std::string dist = s.value("dist", std::string("lognormal"));
    if (dist != "lognormal") throw ConfigError("cluster.tm_startup_ms.dist must be lognormal");
    c.startup.p50 = static_cast<SimTime>(std::llround(s.value("p50", 800.0) * kMillisecond));
    c.startup.p99 = static_cast<SimTime>(std::llround(s.value("p99", 5000.0) * kMillisecond));
  }
  if (j.contains("rpc")) {
    c.rpc_a = j["rpc"].value("a_ns", c.rpc_a);
    c.rpc_b = j["rpc"].value("b_ns", c.rpc_b);
  }
  if (j.contains("launch_interval_ms")) {
    c.launch_interval = static_cast<SimTime>(std::llround(j["launch_interval_ms"].get<double>() * kMillisecond));
  }
  if (j.contains("parse")) {
    c.parse_per_task = j["parse"].value("per_task_ns", c.parse_per_task);
    c.parse_per_edge_object = j["parse"].value("per_edge_ns", c.parse_per_edge_object);
  }
  if (c.slots_per_tm < 1) throw ConfigError("cluster.slots_per_tm must be >= 1");
  if (c.rpc_a < 0 || c.rpc_b < 0) throw ConfigError("cluster.rpc costs must be >= 0");
  if (c.spares < 0) throw ConfigError("cluster.spares must be >= 0");
  return c;
}

nlohmann::json ClusterModelToJson(const ClusterModel& c) {
  return {{"tms", c.tms},
          {"slots_per_tm", c.slots_per_tm},
          {"spares", c.spares},
          {"tm_startup_ms",
           {{"dist", "lognormal"}, {"p50", ToMillis(c.startup.p50)}, {"p99", ToMillis(c.startup.p99)}}},
          {"rpc", {{"a_ns", c.rpc_a}, {"b_ns", c.rpc_b}}},
          {"launch_interval_ms", ToMillis(c.launch_interval)},
          {"parse", {{"per_task_ns", c.parse_per_task}, {"per_edge_ns", c.parse_per_edge_object}}}};
}

nlohmann::json StartupReportToJson(const StartupReport& r) {
  return {{"parse_ns", r.parse_ns},
          {"allocate_ns", r.allocate_ns},
          {"deploy_ns", r.deploy_ns},
          {"total_ns", r.total_ns},
          {"rpc_count", r.rpc_count},
          {"tms_needed", r.tms_needed},
          {"redundant_tms_used", r.redundant_tms_used},
          {"spares_provisioned", r.spares_provisioned},
          {"surplus_released", r.surplus_released},
          {"surplus_after_running", r.surplus_after_running},
          {"mitigation_triggered", r.mitigation_triggered}};
}

SimTime ParseTime(const graph::ExecutionGraph& job, const ClusterModel& c, bool dedup) {
  std::int64_t objects = dedup ? static_cast<std::int64_t>(job.descriptors.size())
                               : static_cast<std::int64_t>(job.channels.size());
  return c.parse_per_task * job.task_count() + c.parse_per_edge_object * objects;
}

SimTime DeployTime(const graph::ExecutionGraph& job, const ClusterModel& c, bool batched,
                   std::int64_t* rpc_count) {
  std::map<std::int32_t, std::int64_t> per_tm;
  for (TmId tm : job.placement) ++per_tm[Value(tm)];
  SimTime total = 0;
  std::int64_t rpcs = 0;
  if (batched) {
    for (const auto& [tm, n] : per_tm) {
      total += c.rpc_a + c.rpc_b * n;
      ++rpcs;
    }
  } else {
    rpcs = job.task_count();
    total = (c.rpc_a + c.rpc_b) * rpcs;
  }
  if (rpc_count) *rpc_count = rpcs;
  return total;
}

MitigationActions MitigateSlowTms(const AllocState& state, SimTime threshold, double frac, int cap) {
  MitigationActions a;
  if (state.elapsed < threshold || state.registered >= state.needed) return a;
  int want = std::min(static_cast<int>(std::ceil(frac * state.needed - 1e-9)), cap);
  a.extra = std::min(want, state.spare_pool);
  a.triggered = a.extra > 0;
  if (a.extra < want) a.warning = "spare pool exhausted: provisioned " + std::to_string(a.extra) + " of " + std::to_string(want);
  return a;
}

namespace {

struct Registration {
  SimTime at;
  int id;
  bool spare;
  bool operator<(const Registration& o) const { return at != o.at ? at < o.at : id < o.id; }
};

// Returns when `needed` TMs have registered; fills report bookkeeping.
SimTime Allocate(int needed, const ClusterModel& cluster, const StartupOptions& opts, std::uint64_t seed,
                 StartupReport& report) {
  if (needed <= 0) return 0;
  if (needed > cluster.tms + (opts.mitigation ? cluster.spares : 0)) {
    throw StartupError("cluster has " + std::to_string(cluster.tms) + " TMs, job needs " +
                       std::to_string(needed));
  }
  std::mt19937_64 rng(seed);
  std::vector<Registration> regs;
  for (int i = 0; i < needed; ++i) {
    SimTime sample = cluster.startup.Sample(rng);
    auto fixed = cluster.fixed_startup.find(i);
    if (fixed != cluster.fixed_startup.end()) sample = fixed->second;
    regs.push_back({cluster.launch_interval * i + sample, i, false});
  }
  std::sort(regs.begin(), regs.end());
  SimTime done = regs[needed - 1].at;
  if (opts.mitigation && done > opts.threshold) {
    AllocState st;
    st.needed = needed;
    st.elapsed = opts.threshold;
    st.registered = static_cast<int>(std::count_if(regs.begin(), regs.end(),
                                                   [&](const Registration& r) { return r.at <= opts.threshold; }));
    st.spare_pool = cluster.spares;
    auto act = MitigateSlowTms(st, opts.threshold, opts.frac, opts.cap);
    if (!act.warning.empty()) report.warnings.push_back(act.warning);
    report.mitigation_triggered = act.triggered;
    report.spares_provisioned = act.extra;
    for (int s = 0; s < act.extra; ++s) {
      regs.push_back({opts.threshold + cluster.startup.Sample(rng), needed + s, true});
    }
    std::sort(regs.begin(), regs.end());
    done = regs[needed - 1].at;
    for (int i = 0; i < needed; ++i) report.redundant_tms_used += regs[i].spare ? 1 : 0;
    // Everything beyond the first `needed` registrations is surplus and is
    // handed back once the job is running.
    report.surplus_released = static_cast<int>(regs.size()) - needed;
  }
  report.surplus_after_running = 0;
  return done;
}

}  // namespace

StartupReport RunStartup(const graph::ExecutionGraph& job, const ClusterModel& cluster,
                         const StartupOptions& opts, std::uint64_t seed) {
  StartupReport r;
  r.tms_needed = job.num_tms;
  r.parse_ns = ParseTime(job, cluster, opts.dedup);
  r.allocate_ns = Allocate(job.num_tms, cluster, opts, seed, r);
  r.deploy_ns = DeployTime(job, cluster, opts.batched, &r.rpc_count);
  r.total_ns = r.parse_ns + r.allocate_ns + r.deploy_ns;
  return r;
}

StartupReport HotUpdate(int held_tms, const graph::ExecutionGraph& next, const ClusterModel& cluster,
                        const StartupOptions& opts, std::uint64_t seed) {
  StartupReport r;
  r.tms_needed = next.num_tms;
  r.parse_ns = ParseTime(next, cluster, opts.dedup);
  int extra = std::max(0, next.num_tms - held_tms);
  if (extra > 0) {
    StartupOptions cold = opts;
    r.allocate_ns = Allocate(extra, cluster, cold, seed, r);
  }
  r.deploy_ns = DeployTime(next, cluster, opts.batched, &r.rpc_count);
  r.total_ns = r.parse_ns + r.allocate_ns + r.deploy_ns;
  return r;
}

}  // namespace streamlab::control
