#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "streamlab/common/types.h"

namespace streamlab::runtime {

// Log-linear histogram of durations (8 sub-buckets per power of two of
// microseconds).
class LatencyHistogram {
 public:
  static constexpr int kBins = 320;

  void Add(SimTime latency);
  void Merge(const LatencyHistogram& o);
  std::int64_t count() const { return count_; }
  // Upper edge of the bin holding quantile q; 0 when empty.
  SimTime Percentile(double q) const;

  static int BinOf(SimTime latency);
  static SimTime UpperEdge(int bin);

 private:
  std::array<std::uint32_t, kBins> bins_{};
  std::int64_t count_ = 0;
};

struct CheckpointLogEntry {
  std::int64_t id = 0;
  std::string mode;
  bool success = false;
  std::vector<bool> region_success;
  SimTime trigger_time = 0;
  SimTime duration = 0;
  std::string error;
};

struct RecoveryLogEntry {
  SimTime time = 0;  // failure instant
  std::string scope;
  std::string strategy;
  std::vector<TaskId> tasks;
  SimTime recovery_time = 0;
  SimTime completed_at = 0;
  std::int64_t dropped = 0;
  std::int64_t replayed = 0;
  bool standby = false;
};

struct ScaleLogEntry {
  SimTime time = 0;
  std::string outcome;
  std::string reason;
  std::vector<int> before;
  std::vector<int> target;
  std::vector<int> after;
};

struct Conservation {
  std::int64_t emitted = 0;
  std::int64_t consumed = 0;
  std::int64_t in_flight = 0;
  std::int64_t dropped_loss = 0;
  std::int64_t rolled_back = 0;
  std::int64_t fenced = 0;

  std::int64_t dropped() const { return dropped_loss + rolled_back + fenced; }
  bool Balanced() const { return emitted == consumed + in_flight + dropped(); }
};

struct RuntimeMetrics {
  std::vector<std::int64_t> qps;      // first-hop records per 1 s bucket
  std::vector<std::int64_t> output;   // terminal records per 1 s bucket
  std::vector<std::int64_t> backlog;  // sampled once per second
  std::vector<std::unique_ptr<LatencyHistogram>> latency;  // per 1 s bucket
  std::vector<CheckpointLogEntry> checkpoints;
  std::vector<RecoveryLogEntry> recoveries;
  std::vector<ScaleLogEntry> scaling;
  std::vector<std::vector<int>> parallelism_series;  // per autoscale interval
  std::int64_t duplicates = 0;
  std::int64_t inherent_misses = 0;
  std::int64_t terminations = 0;
  std::int64_t leader_changes = 0;
  std::int64_t source_records = 0;
  std::vector<std::string> warnings;

  void CountQps(SimTime t, std::int64_t n = 1);
  void CountOutput(SimTime t, std::int64_t n = 1);
  void AddLatency(SimTime t, SimTime latency);
};

}  // namespace streamlab::runtime
