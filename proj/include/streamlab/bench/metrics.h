#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamlab/runtime/job_runtime.h"

namespace streamlab::bench {

struct MetricsReport {
  bool valid = true;
  std::string error;
  bool completed = false;
  bool terminated = false;
  SimTime end_time = 0;

  std::vector<std::int64_t> qps;     // 1 s buckets
  std::vector<std::int64_t> output;  // 1 s buckets
  std::vector<std::int64_t> backlog;
  std::vector<SimTime> p99_series;   // per 1 s bucket, 0 when empty
  SimTime latency_p50 = 0;
  SimTime latency_p99 = 0;
  SimTime latency_p99_outside_recovery = 0;
  double qps_mean = 0;  // over the measurement window
  std::int64_t qps_min = 0;
  double qps_min_10s = 0;  // lowest 10 s bucket mean

  std::int64_t checkpoint_attempts = 0;
  std::int64_t checkpoint_successes = 0;
  std::vector<std::int64_t> region_successes;
  std::vector<runtime::CheckpointLogEntry> checkpoints;
  std::vector<runtime::RecoveryLogEntry> recoveries;
  std::vector<runtime::ScaleLogEntry> scaling;
  std::vector<std::vector<int>> parallelism_series;

  std::int64_t records_dropped = 0;  // fault-induced losses
  std::int64_t duplicates = 0;
  std::int64_t inherent_misses = 0;
  std::int64_t terminations = 0;
  std::int64_t leader_changes = 0;
  std::int64_t source_records = 0;
  runtime::Conservation conservation;
  std::map<std::uint64_t, std::int64_t> input_ledger;  // key -> records emitted by sources
  runtime::Ledger output_ledger;
  std::uint64_t trace_digest = 0;
  std::uint64_t events = 0;
  std::vector<std::string> warnings;

  double checkpoint_success_pct() const {
    return checkpoint_attempts == 0 ? 0.0 : 100.0 * checkpoint_successes / checkpoint_attempts;
  }
  SimTime max_recovery_time() const;
};

struct CollectOptions {
  SimTime window_begin = kSecond;  // QPS statistics window [begin, end)
  SimTime window_end = 0;          // 0: end of run
  SimTime recovery_grace = 10 * kSecond;
  bool input_ledger = true;
};

MetricsReport Collect(runtime::JobRuntime& rt, bool completed, const CollectOptions& opts = {});

// Digest over the output ledger, stable across runs.
std::uint64_t LedgerDigest(const runtime::Ledger& l);

nlohmann::json SummaryJson(const MetricsReport& r);
nlohmann::json CheckpointLogLine(const runtime::CheckpointLogEntry& e);
nlohmann::json RecoveryLogLine(const runtime::RecoveryLogEntry& e);
nlohmann::json ScaleLogLine(const runtime::ScaleLogEntry& e);

// Writes metrics.jsonl, summary.json, series.csv, checkpoints.jsonl,
// recovery.jsonl, scaling.jsonl and ledger.json into dir.
void WriteReport(const MetricsReport& r, const std::string& dir);

}  // namespace streamlab::bench
