#include "streamlab/recovery/recovery_plan.h"

#include <algorithm>
#include <set>

namespace streamlab::recovery {

std::string StrategyName(RecoveryStrategy s) {
  switch (s) {
    case RecoveryStrategy::FullRestart: return "full_restart";
    case RecoveryStrategy::RegionFailover: return "region_failover";
    case RecoveryStrategy::SingleTask: return "single_task";
  }
  return "?";
}

RecoveryStrategy ParseStrategy(const std::string& name) {
  if (name == "full_restart" || name == "full") return RecoveryStrategy::FullRestart;
  if (name == "region_failover" || name == "region") return RecoveryStrategy::RegionFailover;
  if (name == "single_task" || name == "single") return RecoveryStrategy::SingleTask;
  throw ConfigError("unknown recovery strategy '" + name + "'");
}

std::string CompletenessName(Completeness c) { return c == Completeness::Full ? "full" : "partial"; }

Completeness ParseCompleteness(const std::string& name) {
  if (name == "full") return Completeness::Full;
  if (name == "partial") return Completeness::Partial;
  throw ConfigError("unknown completeness '" + name + "'");
}

RecoveryPlan PlanRecovery(const FailureEvent& failure, RecoveryStrategy strategy,
                          Completeness completeness, const graph::ExecutionGraph& exec,
                          const graph::RegionPartition& regions,
                          const checkpoint::CheckpointRegistry& registry) {
  if (strategy == RecoveryStrategy::SingleTask && completeness == Completeness::Full) {
    throw PolicyError("single-task recovery drops records; it needs completeness = partial");
  }
  RecoveryPlan plan;
  plan.strategy = strategy;
  std::set<TaskId> restart;
  std::set<int> touched;
  switch (strategy) {
    case RecoveryStrategy::FullRestart:
      restart.insert(exec.tasks.begin(), exec.tasks.end());
      for (int r = 0; r < regions.count(); ++r) touched.insert(r);
      break;
    case RecoveryStrategy::RegionFailover:
      for (const auto& t : failure.failed_tasks) touched.insert(regions.RegionOf(exec, t));
      for (int r : touched) restart.insert(regions.regions[r].begin(), regions.regions[r].end());
      break;
    case RecoveryStrategy::SingleTask:
      for (const auto& t : failure.failed_tasks) {
        restart.insert(t);
        touched.insert(regions.RegionOf(exec, t));
      }
      break;
  }
  plan.tasks_to_restart.assign(restart.begin(), restart.end());
  plan.regions.assign(touched.begin(), touched.end());
  plan.restore = registry.restore_target();
  if (plan.restore) {
    for (int r : plan.regions) {
      if (r < static_cast<int>(plan.restore->regions.size())) {
        for (const auto& [src, off] : plan.restore->regions[r].source_offsets) {
          plan.source_rewind[src] = off;
        }
      }
    }
  }
  return plan;
}

}  // namespace streamlab::recovery
