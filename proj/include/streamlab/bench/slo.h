#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "streamlab/common/types.h"
#include "streamlab/recovery/recovery_plan.h"

namespace streamlab::bench {

struct MetricsReport;

struct SloTarget {
  recovery::Completeness gamma = recovery::Completeness::Full;
  SimTime lambda_max = 2 * kSecond;
  SimTime tau_max = kMinute;
  std::int64_t max_dropped = 0;  // bound used when gamma = partial
};

// Named presets for the recovery-latency x completeness scenario grid. The
// latency and drop bounds are placeholders meant to be edited.
SloTarget SloPreset(const std::string& name);
SloTarget SloFromJson(const nlohmann::json& j);
nlohmann::json SloToJson(const SloTarget& s);

struct SloVerdict {
  bool completeness_ok = false;
  bool latency_ok = false;
  bool recovery_ok = false;
  bool overall = false;
  std::int64_t dropped = 0;
  SimTime p99_outside_recovery = 0;
  SimTime max_recovery_time = 0;
  std::string explanation;
};

// Throws VerdictError for an invalid report or target.
SloVerdict EvaluateSlo(const MetricsReport& report, const SloTarget& target);
nlohmann::json VerdictToJson(const SloVerdict& v, const SloTarget& target);

}  // namespace streamlab::bench
