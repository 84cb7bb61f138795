#include "streamlab/checkpoint/registry.h"

#include <cmath>

namespace streamlab::checkpoint {

std::string ModeName(CheckpointMode m) { return m == CheckpointMode::Global ? "global" : "region"; }

CheckpointMode ParseMode(const std::string& name) {
  if (name == "global") return CheckpointMode::Global;
  if (name == "region") return CheckpointMode::Region;
  throw ConfigError("unknown checkpoint mode '" + name + "'");
}

bool CheckpointAttempt::AllResolved() const {
  for (const auto& a : per_task) {
    if (a.status == AckStatus::Pending) return false;
  }
  return true;
}

void CheckpointRegistry::RecordSuccess(int region, RegionEntry entry) {
  auto& slot = latest_.at(region);
  if (slot && slot->checkpoint_id > entry.checkpoint_id) return;
  slot = std::move(entry);
}

bool CheckpointRegistry::AllRegionsHaveSuccess() const {
  for (const auto& e : latest_) {
    if (!e) return false;
  }
  return true;
}

void CheckpointRegistry::Reset(int regions) {
  latest_.assign(regions, std::nullopt);
  target_.reset();
}

GlobalCheckpointRecord MergeRegionCheckpoints(std::int64_t record_id,
                                              const std::vector<RegionOutcome>& outcomes,
                                              CheckpointRegistry& registry) {
  for (const auto& o : outcomes) {
    if (o.success) registry.RecordSuccess(o.region, o.entry);
  }
  GlobalCheckpointRecord rec;
  rec.id = record_id;
  for (int r = 0; r < registry.region_count(); ++r) {
    const auto& latest = registry.Latest(r);
    if (!latest) {
      throw MergeError(r, "region " + std::to_string(r) + " is unrestorable: no successful checkpoint");
    }
    rec.regions.push_back(*latest);
  }
  registry.SetRestoreTarget(rec);
  return rec;
}

AttemptOutcome FinalizeAttempt(CheckpointAttempt& attempt, const std::vector<int>& task_to_region,
                               int region_count, CheckpointRegistry& registry, SimTime now) {
  if (attempt.finalized) throw EngineError("checkpoint attempt finalized twice");
  attempt.finalized = true;
  AttemptOutcome out;
  out.id = attempt.id;
  out.mode = attempt.mode;
  out.duration = now - attempt.trigger_time;
  out.region_success.assign(region_count, true);
  std::vector<RegionEntry> entries(region_count);
  for (std::size_t t = 0; t < attempt.per_task.size(); ++t) {
    const auto& ack = attempt.per_task[t];
    int r = task_to_region[t];
    if (ack.status != AckStatus::Acked) {
      out.region_success[r] = false;
      continue;
    }
    entries[r].checkpoint_id = attempt.id;
    entries[r].handles.push_back(ack.handle);
    if (ack.source_index >= 0) entries[r].source_offsets[ack.source_index] = ack.source_offset;
  }
  if (attempt.mode == CheckpointMode::Global) {
    bool all = true;
    for (bool ok : out.region_success) all = all && ok;
    out.success = all;
    if (all) {
      GlobalCheckpointRecord rec;
      rec.id = attempt.id;
      for (int r = 0; r < region_count; ++r) {
        entries[r].checkpoint_id = attempt.id;
        registry.RecordSuccess(r, entries[r]);
        rec.regions.push_back(entries[r]);
      }
      registry.SetRestoreTarget(rec);
      out.record = std::move(rec);
    } else {
      out.error = "task checkpoint failed";
    }
    return out;
  }
  std::vector<RegionOutcome> outcomes;
  bool any = false;
  for (int r = 0; r < region_count; ++r) {
    entries[r].checkpoint_id = attempt.id;
    outcomes.push_back({r, out.region_success[r], entries[r]});
    any = any || out.region_success[r];
  }
  try {
    out.record = MergeRegionCheckpoints(attempt.id, outcomes, registry);
    out.success = any;
    if (!any) out.error = "no region succeeded";
  } catch (const MergeError& err) {
    out.success = false;
    out.error = err.what();
  }
  return out;
}

double PredictGlobalSuccess(double p_task_fail, std::int64_t n_tasks) {
  if (p_task_fail < 0 || p_task_fail > 1 || n_tasks < 1) {
    throw ConfigError("predict_global_success needs p in [0,1] and n >= 1");
  }
  if (p_task_fail == 1.0) return 0.0;
  return std::exp(static_cast<double>(n_tasks) * std::log1p(-p_task_fail));
}

}  // namespace streamlab::checkpoint
