#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamlab/checkpoint/registry.h"
#include "streamlab/graph/graph.h"

namespace streamlab::recovery {

enum class RecoveryStrategy { FullRestart, RegionFailover, SingleTask };
enum class Completeness { Full, Partial };

std::string StrategyName(RecoveryStrategy s);
RecoveryStrategy ParseStrategy(const std::string& name);
std::string CompletenessName(Completeness c);
Completeness ParseCompleteness(const std::string& name);

struct FailureEvent {
  enum class Scope { Task, Tm, Jm };
  SimTime time = 0;
  Scope scope = Scope::Task;
  std::vector<TaskId> failed_tasks;
  TmId tm{-1};
  std::string cause;
};

struct RecoveryPlan {
  RecoveryStrategy strategy = RecoveryStrategy::FullRestart;
  std::vector<TaskId> tasks_to_restart;  // sorted
  std::vector<int> regions;              // regions touched, sorted
  std::optional<checkpoint::GlobalCheckpointRecord> restore;
  std::map<int, std::int64_t> source_rewind;  // source index -> restore offset
};

struct RecoveryReport {
  SimTime recovery_time = 0;
  std::int64_t records_dropped = 0;
  std::int64_t records_replayed = 0;
};

// Throws PolicyError for SingleTask when the job requires full completeness.
RecoveryPlan PlanRecovery(const FailureEvent& failure, RecoveryStrategy strategy,
                          Completeness completeness, const graph::ExecutionGraph& exec,
                          const graph::RegionPartition& regions,
                          const checkpoint::CheckpointRegistry& registry);

}  // namespace streamlab::recovery
