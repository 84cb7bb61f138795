#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamlab/graph/graph.h"
#include "streamlab/runtime/source_log.h"

namespace streamlab::bench {

enum class WorkloadKind { Q2Filter, Q12WindowCount, DataSync, SampleStitch };

std::string WorkloadName(WorkloadKind k);
WorkloadKind ParseWorkload(const std::string& name);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::DataSync;
  int parallelism = 4;
  int source_parallelism = 0;  // 0: same as parallelism
  std::vector<runtime::RateStep> rate{{0, 1000.0}};  // per source subtask
  SimTime duration = 60 * kSecond;
  double zipf_s = 0;
  std::uint64_t key_space = 1000;
  double selectivity = 0.5;      // Q2 filter pass fraction
  SimTime window = 5 * kSecond;  // Q12 tumbling window
  SimTime stitch_delay = 2 * kSecond;
  double missing_fraction = 0.01;
  SimTime join_timeout = 30 * kSecond;
  std::string shuffle;  // empty: per-kind default
  nlohmann::json shuffle_params = nlohmann::json::object();
  SimTime source_service = 0;
  SimTime op_service = 100 * kMicrosecond;
  SimTime sink_service = 10 * kMicrosecond;

  int sources() const { return source_parallelism > 0 ? source_parallelism : parallelism; }
  // Throws ConfigError.
  void Validate() const;
};

WorkloadSpec WorkloadFromJson(const nlohmann::json& j);
nlohmann::json WorkloadToJson(const WorkloadSpec& w);

struct BuiltWorkload {
  graph::LogicalGraph graph;
  std::vector<runtime::SourceProfile> sources;  // one per source operator
};

BuiltWorkload BuildWorkload(const WorkloadSpec& w);

// Records the sources have produced by virtual time t (all source subtasks).
std::int64_t GeneratedCount(const WorkloadSpec& w, SimTime t, std::uint64_t seed);

// Key of every record source subtask `index` produces up to t, in offset order.
std::vector<std::uint64_t> GeneratedKeys(const WorkloadSpec& w, int index, SimTime t, std::uint64_t seed);

}  // namespace streamlab::bench
