#include <algorithm>

#include "streamlab/runtime/job_runtime.h"

namespace streamlab::runtime {

using checkpoint::AckStatus;

void JobRuntime::ScheduleCheckpoint(SimTime at) {
  sim_.Schedule(at, [this] {
    if (terminated_ || all_finished()) return;
    TriggerCheckpoint();
    ScheduleCheckpoint(now() + cfg_.checkpoint_interval);
  });
}

std::int64_t JobRuntime::TriggerCheckpoint() {
  if (!jm_alive_ || rescaling_ || terminated_) return -1;
  if (attempt_ && !attempt_->finalized) return -1;
  const std::int64_t id = next_checkpoint_id_++;
  checkpoint::CheckpointAttempt a;
  a.id = id;
  a.mode = cfg_.checkpoint_mode;
  a.trigger_time = now();
  a.deadline = now() + cfg_.checkpoint_deadline;
  a.per_task.resize(tasks_.size());
  attempt_ = std::move(a);

  if (!store_.available()) {
    for (auto& ack : attempt_->per_task) {
      ack.status = AckStatus::Failed;
      ack.cause = "store unavailable";
    }
    Finalize();
    return id;
  }
  for (auto& tp : tasks_) {
    Task& t = *tp;
    attempt_->per_task[t.flat].source_index = t.source_index;
    if (t.state == TaskState::Finished) {
      auto h = StoreFinished(t);
      auto& ack = attempt_->per_task[t.flat];
      ack.status = AckStatus::Acked;
      ack.handle = h;
      ack.source_offset = t.st.next_offset;
      continue;
    }
    if (t.state != TaskState::Running || t.frozen) {
      FailAck(t.flat, "task not running");
      continue;
    }
    if (t.source_index < 0) continue;
    TakeSnapshot(t);
    if (!t.eos_sent) {
      EmitControl(t, ItemKind::Barrier, id);
      Flush(t);
    }
  }
  if (!attempt_ || attempt_->id != id || attempt_->finalized) return id;
  std::uint64_t token = ++finalize_token_;
  sim_.Schedule(attempt_->deadline, [this, id, token] {
    if (attempt_ && attempt_->id == id && !attempt_->finalized && token == finalize_token_) MaybeFinalize(true);
  });
  MaybeFinalize(false);
  return id;
}

void JobRuntime::OnBarrier(Task& t, int input, std::int64_t id) {
  if (!attempt_ || attempt_->finalized || attempt_->id != id) return;
  if (id <= t.last_aligned) return;
  if (attempt_->per_task[t.flat].status != AckStatus::Pending) return;
  if (t.aligning != id) {
    t.aligning = id;
    t.barrier_seen.assign(t.inputs.size(), false);
  }
  t.barrier_seen[input] = true;
  for (std::size_t i = 0; i < t.inputs.size(); ++i) {
    if (!t.barrier_seen[i] && !t.eos_seen[i]) return;
  }
  CompleteAlignment(t);
}

bool JobRuntime::AlignmentBlocks(const Task& t, int input) const {
  return t.aligning >= 0 && t.barrier_seen[input];
}

void JobRuntime::CompleteAlignment(Task& t) {
  std::int64_t id = t.aligning;
  t.aligning = -1;
  t.barrier_seen.clear();
  t.last_aligned = id;
  TakeSnapshot(t);
  if (!t.terminal && !t.eos_sent) EmitControl(t, ItemKind::Barrier, id);
}

void JobRuntime::TakeSnapshot(Task& t) {
  const std::int64_t id = attempt_->id;
  t.last_aligned = std::max(t.last_aligned, id);
  bool full = !cfg_.incremental || t.snapshots_taken % cfg_.full_every == 0;
  std::int64_t bytes = cfg_.base_state_bytes +
                       (full ? t.st.KeyCount() : std::min(t.dirty, t.st.KeyCount())) * cfg_.bytes_per_key;
  checkpoint::SnapshotHandle h;
  h.task = t.id;
  h.checkpoint_id = id;
  h.store_key = "ckpt/" + std::to_string(id) + "/" + std::to_string(t.id.op) + "/" +
                std::to_string(t.id.subtask) + "/" + std::to_string(t.epoch);
  h.size_bytes = bytes;
  h.full = full;
  if (!full && t.last_handle) h.base = t.last_handle;
  ++t.snapshots_taken;
  t.dirty = 0;
  t.last_handle = h.store_key;

  auto delay = store_.BeginPut(bytes);
  if (!delay) {
    FailAck(t.flat, "store unavailable");
    MaybeFinalize(false);
    return;
  }
  auto blob = std::make_shared<const TaskSnapshot>(t.st);
  int flat = t.flat;
  std::uint64_t inc = t.incarnation;
  std::int64_t offset = t.st.next_offset;
  sim_.Schedule(now() + *delay, [this, flat, inc, id, h, blob, offset] {
    store_.CompletePut(h.store_key, h.size_bytes, blob);
    uncompacted_.insert(h.store_key);
    OnAck(flat, inc, id, h, offset);
  });
}

void JobRuntime::OnAck(int flat, std::uint64_t inc, std::int64_t id, checkpoint::SnapshotHandle handle,
                       int64_t offset) {
  if (!attempt_ || attempt_->finalized || attempt_->id != id) return;
  if (flat >= static_cast<int>(tasks_.size()) || task(flat).incarnation != inc) return;
  auto& ack = attempt_->per_task[flat];
  if (ack.status != AckStatus::Pending) return;
  ack.status = AckStatus::Acked;
  ack.handle = std::move(handle);
  ack.source_index = task(flat).source_index;
  ack.source_offset = offset;
  MaybeFinalize(false);
}

void JobRuntime::FailAck(int flat, const std::string& cause) {
  if (!attempt_ || attempt_->finalized) return;
  if (flat >= static_cast<int>(attempt_->per_task.size())) return;
  auto& ack = attempt_->per_task[flat];
  if (ack.status != AckStatus::Pending) return;
  ack.status = AckStatus::Failed;
  ack.cause = cause;
}

void JobRuntime::MaybeFinalize(bool deadline) {
  if (!attempt_ || attempt_->finalized) return;
  if (deadline || attempt_->AllResolved()) {
    Finalize();
    return;
  }
  if (attempt_->mode == checkpoint::CheckpointMode::Global) {
    for (const auto& ack : attempt_->per_task) {
      if (ack.status == AckStatus::Failed) {
        Finalize();
        return;
      }
    }
  }
}

void JobRuntime::Finalize() {
  if (!attempt_ || attempt_->finalized) return;
  for (auto& ack : attempt_->per_task) {
    if (ack.status == AckStatus::Pending) {
      ack.status = AckStatus::Failed;
      ack.cause = "deadline";
    }
  }
  auto out = checkpoint::FinalizeAttempt(*attempt_, regions_.task_to_region, regions_.count(), registry_, now());
  CheckpointLogEntry e;
  e.id = out.id;
  e.mode = checkpoint::ModeName(out.mode);
  e.success = out.success;
  e.region_success = out.region_success;
  e.trigger_time = attempt_->trigger_time;
  e.duration = out.duration;
  e.error = out.error;
  metrics_.checkpoints.push_back(std::move(e));
  ++finalize_token_;
  ReleaseAlignment();
  CompactStore();
}

void JobRuntime::ReleaseAlignment() {
  for (auto& tp : tasks_) {
    Task& t = *tp;
    if (t.aligning < 0) continue;
    t.aligning = -1;
    t.barrier_seen.clear();
    if (t.state == TaskState::Running) Wake(t, now());
  }
}

void JobRuntime::CompactStore() {
  std::set<std::string> keep;
  auto hold = [&](const checkpoint::RegionEntry& e) {
    for (const auto& h : e.handles) keep.insert(h.store_key);
  };
  for (int r = 0; r < registry_.region_count(); ++r) {
    if (registry_.Latest(r)) hold(*registry_.Latest(r));
  }
  if (registry_.restore_target()) {
    for (const auto& e : registry_.restore_target()->regions) hold(e);
  }
  for (auto it = uncompacted_.begin(); it != uncompacted_.end();) {
    if (keep.count(*it)) {
      ++it;
      continue;
    }
    store_.Compact(*it);
    it = uncompacted_.erase(it);
  }
}

checkpoint::SnapshotHandle JobRuntime::StoreFinished(Task& t) {
  if (t.finished_handle) return *t.finished_handle;
  checkpoint::SnapshotHandle h;
  h.task = t.id;
  h.checkpoint_id = attempt_ ? attempt_->id : 0;
  h.store_key = "final/" + std::to_string(generation_) + "/" + std::to_string(t.id.op) + "/" +
                std::to_string(t.id.subtask) + "/" + std::to_string(t.incarnation);
  h.size_bytes = cfg_.base_state_bytes + t.st.KeyCount() * cfg_.bytes_per_key;
  h.full = true;
  store_.CompletePut(h.store_key, h.size_bytes, std::make_shared<const TaskSnapshot>(t.st));
  t.finished_handle = h;
  return h;
}

}  // namespace streamlab::runtime
