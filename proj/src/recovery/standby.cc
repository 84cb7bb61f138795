#include "streamlab/recovery/standby.h"

namespace streamlab::recovery {

std::string ReplicationName(ReplicationMode m) {
  return m == ReplicationMode::Passive ? "passive" : "active_standby";
}

ReplicationMode ParseReplication(const std::string& name) {
  if (name == "passive") return ReplicationMode::Passive;
  if (name == "active_standby" || name == "active") return ReplicationMode::ActiveStandby;
  throw ConfigError("unknown replication mode '" + name + "'");
}

bool IsDeterministic(graph::OperatorKind kind) {
  // Join timeouts depend on processing time.
  return kind != graph::OperatorKind::Join;
}

SwitchReport PromoteStandby(bool standby_alive, SimTime detection, std::int64_t lag_records,
                            SimTime service_time, std::int64_t last_emitted_offset) {
  SwitchReport r;
  if (!standby_alive) return r;
  r.promoted = true;
  r.switch_latency = detection + lag_records * service_time;
  r.gate_offset = last_emitted_offset + 1;
  return r;
}

}  // namespace streamlab::recovery
