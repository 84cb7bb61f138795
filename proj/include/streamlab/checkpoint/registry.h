#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamlab/common/types.h"

namespace streamlab::checkpoint {

enum class CheckpointMode { Global, Region };

std::string ModeName(CheckpointMode m);
CheckpointMode ParseMode(const std::string& name);

struct SnapshotHandle {
  TaskId task;
  std::int64_t checkpoint_id = 0;
  std::string store_key;
  std::int64_t size_bytes = 0;
  std::optional<std::string> base;  // previous link of an incremental chain
  bool full = true;
};

enum class AckStatus { Pending, Acked, Failed };

struct TaskAck {
  AckStatus status = AckStatus::Pending;
  SnapshotHandle handle;
  std::string cause;
  int source_index = -1;  // set for source tasks
  std::int64_t source_offset = 0;
};

struct CheckpointAttempt {
  std::int64_t id = 0;
  CheckpointMode mode = CheckpointMode::Global;
  SimTime trigger_time = 0;
  SimTime deadline = 0;
  std::vector<TaskAck> per_task;  // by flat task index
  bool finalized = false;

  bool AllResolved() const;
};

struct RegionEntry {
  std::int64_t checkpoint_id = 0;
  std::vector<SnapshotHandle> handles;
  std::map<int, std::int64_t> source_offsets;  // source index -> next offset
};

struct GlobalCheckpointRecord {
  std::int64_t id = 0;
  std::vector<RegionEntry> regions;
};

// Latest successful checkpoint per region plus the current restore target.
class CheckpointRegistry {
 public:
  explicit CheckpointRegistry(int regions = 0) : latest_(regions) {}

  int region_count() const { return static_cast<int>(latest_.size()); }
  const std::optional<RegionEntry>& Latest(int region) const { return latest_.at(region); }
  // Ignores entries older than the one held (monotone per region).
  void RecordSuccess(int region, RegionEntry entry);
  bool AllRegionsHaveSuccess() const;

  const std::optional<GlobalCheckpointRecord>& restore_target() const { return target_; }
  void SetRestoreTarget(GlobalCheckpointRecord r) { target_ = std::move(r); }
  void Reset(int regions);

 private:
  std::vector<std::optional<RegionEntry>> latest_;
  std::optional<GlobalCheckpointRecord> target_;
};

struct RegionOutcome {
  int region = 0;
  bool success = false;
  RegionEntry entry;  // valid when success
};

// Applies the outcomes to the registry, then builds the merged record from
// the newest success of every region. Throws MergeError naming the first
// region that never succeeded.
GlobalCheckpointRecord MergeRegionCheckpoints(std::int64_t record_id,
                                              const std::vector<RegionOutcome>& outcomes,
                                              CheckpointRegistry& registry);

struct AttemptOutcome {
  std::int64_t id = 0;
  CheckpointMode mode = CheckpointMode::Global;
  bool success = false;
  std::vector<bool> region_success;
  std::optional<GlobalCheckpointRecord> record;
  std::string error;
  SimTime duration = 0;
};

// task_to_region is by flat task index.
AttemptOutcome FinalizeAttempt(CheckpointAttempt& attempt, const std::vector<int>& task_to_region,
                               int region_count, CheckpointRegistry& registry, SimTime now);

double PredictGlobalSuccess(double p_task_fail, std::int64_t n_tasks);

}  // namespace streamlab::checkpoint
