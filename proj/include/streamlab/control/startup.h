#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamlab/common/types.h"
#include "streamlab/graph/graph.h"

namespace streamlab::control {

// Lognormal TM startup latency parameterised by its median and 99th
// percentile.
struct TmStartupModel {
  SimTime p50 = 800 * kMillisecond;
  SimTime p99 = 5 * kSecond;

  double mu() const;
  double sigma() const;
  SimTime Sample(std::mt19937_64& rng) const;
};

struct ClusterModel {
  int tms = 64;
  int slots_per_tm = 4;
  int spares = 8;
  TmStartupModel startup;
  SimTime rpc_a = 200 * kMicrosecond;  // fixed cost per deployment RPC
  SimTime rpc_b = 5 * kMicrosecond;    // cost per task descriptor in an RPC
  SimTime launch_interval = 0;         // stagger between TM launch requests
  SimTime parse_per_task = 300 * kMicrosecond;
  SimTime parse_per_edge_object = 15 * kMicrosecond;
  // Forced startup latency by launch index (scripted stragglers).
  std::map<int, SimTime> fixed_startup;

  // Defaults tuned for a 512-TM source->filter startup profile.
  static ClusterModel Calibrated();
};

ClusterModel ClusterModelFromJson(const nlohmann::json& j);
nlohmann::json ClusterModelToJson(const ClusterModel& c);

struct StartupOptions {
  bool batched = true;
  bool dedup = true;
  bool mitigation = false;
  SimTime threshold = 2 * kMinute;
  double frac = 0.30;
  int cap = 5;
};

struct StartupReport {
  SimTime parse_ns = 0;
  SimTime allocate_ns = 0;
  SimTime deploy_ns = 0;
  SimTime total_ns = 0;
  std::int64_t rpc_count = 0;
  int tms_needed = 0;
  int redundant_tms_used = 0;    // spares among the TMs the job runs on
  int spares_provisioned = 0;
  int surplus_released = 0;
  int surplus_after_running = 0;
  bool mitigation_triggered = false;
  std::vector<std::string> warnings;
};

nlohmann::json StartupReportToJson(const StartupReport& r);

SimTime ParseTime(const graph::ExecutionGraph& job, const ClusterModel& c, bool dedup);
SimTime DeployTime(const graph::ExecutionGraph& job, const ClusterModel& c, bool batched,
                   std::int64_t* rpc_count = nullptr);

struct AllocState {
  int needed = 0;
  SimTime elapsed = 0;
  int registered = 0;
  int spare_pool = 0;
};

struct MitigationActions {
  int extra = 0;
  bool triggered = false;
  std::string warning;
};

MitigationActions MitigateSlowTms(const AllocState& state, SimTime threshold, double frac = 0.30,
                                  int cap = 5);

// Cold start: parse, wait for TM registrations, deploy.
StartupReport RunStartup(const graph::ExecutionGraph& job, const ClusterModel& cluster,
                         const StartupOptions& opts, std::uint64_t seed);

// Restart onto already-held TMs. Extra TMs beyond `held_tms` go through the
// cold allocation path.
StartupReport HotUpdate(int held_tms, const graph::ExecutionGraph& next, const ClusterModel& cluster,
                        const StartupOptions& opts, std::uint64_t seed);

}  // namespace streamlab::control
