#pragma once

#include <map>
#include <string>

#include "streamlab/common/types.h"
#include "streamlab/graph/graph.h"

namespace streamlab::recovery {

enum class ReplicationMode { Passive, ActiveStandby };

std::string ReplicationName(ReplicationMode m);
ReplicationMode ParseReplication(const std::string& name);

struct ReplicationConfig {
  ReplicationMode mode = ReplicationMode::Passive;
  std::map<TaskId, TmId> standby;  // ActiveStandby only
  std::int64_t standby_lag_records = 0;
};

// Operators whose output is a pure function of input order; only those may
// run with an active standby.
bool IsDeterministic(graph::OperatorKind kind);

struct SwitchReport {
  bool promoted = false;  // false: fell back to passive recovery
  SimTime switch_latency = 0;
  std::int64_t gate_offset = 0;
};

// Standby catches up `lag_records` at `service_time` each after detection.
SwitchReport PromoteStandby(bool standby_alive, SimTime detection, std::int64_t lag_records,
                            SimTime service_time, std::int64_t last_emitted_offset);

}  // namespace streamlab::recovery
