#include <algorithm>

#include "streamlab/runtime/job_runtime.h"

namespace streamlab::runtime {

using recovery::RecoveryStrategy;

void JobRuntime::KillTm(TmId id) {
  if (Value(id) < 0 || Value(id) >= static_cast<int>(tms_.size())) return;
  Tm& tm = tms_[Value(id)];
  if (!tm.alive) return;
  tm.alive = false;
  bool any = false;
  std::vector<int> hosted(tm.hosted.begin(), tm.hosted.end());
  for (int flat : hosted) {
    Task& t = task(flat);
    if (t.tm != id) continue;
    if (t.state == TaskState::Finished || t.state == TaskState::Canceled) continue;
    if (t.state == TaskState::Failed) continue;
    if (TryStandby(t)) continue;
    MarkFailed(t, "tm " + std::to_string(Value(id)) + " lost");
    any = true;
  }
  if (!tm.standby) ReturnCapacityLater();
  if (any) ScheduleDetection();
}

void JobRuntime::KillJm() {
  if (!jm_alive_) return;
  jm_alive_ = false;
  if (attempt_ && !attempt_->finalized) {
    for (std::size_t f = 0; f < attempt_->per_task.size(); ++f) FailAck(static_cast<int>(f), "jm lost");
    Finalize();
  }
  sim_.Schedule(now() + cfg_.jm_failover, [this] {
    if (terminated_) return;
    ++term_;
    control::LeaderRecord rec{"jm-" + std::to_string(term_), term_, now()};
    control::PublishLeader(zookeeper_, hdfs_leader_, rec);
    jm_alive_ = true;
    ++metrics_.leader_changes;
  });
}

void JobRuntime::FailTask(TaskId id, const std::string& cause) {
  Task& t = task(id);
  if (t.state != TaskState::Running && t.state != TaskState::Deploying && t.state != TaskState::Recovering) {
    return;
  }
  MarkFailed(t, cause);
  ScheduleDetection();
}

void JobRuntime::MarkFailed(Task& t, const std::string& cause) {
  bool single = cfg_.recovery == RecoveryStrategy::SingleTask;
  t.state = TaskState::Failed;
  t.failed_at = now();
  t.fail_cause = cause;
  Renew(t);
  t.busy = false;
  t.in_service.reset();
  t.parked = false;
  t.frozen = false;
  for (const auto& o : t.pending_out) {
    if (!o.item.is_record()) continue;
    if (single) {
      ++acct_.dropped_loss;
      ++task(channels_[o.channel]->consumer()).dropped_to;
    } else {
      ++acct_.rolled_back;
    }
  }
  t.pending_out.clear();
  t.blocked = false;
  for (const auto& chans : t.out_channels) {
    for (int c : chans) {
      if (c >= 0) channels_[c]->RemoveWaiters(t.flat);
    }
  }
  t.aligning = -1;
  t.barrier_seen.clear();
  t.next_wake = -1;
  // With single-task recovery the queued input is lost at once so upstream
  // producers are not held back by a dead consumer.
  if (single) PurgeInputs(t, true);
  FailAck(t.flat, cause);
  MaybeFinalize(false);
  failed_pending_.push_back(t.flat);
}

void JobRuntime::ScheduleDetection() {
  if (detection_scheduled_) return;
  detection_scheduled_ = true;
  sim_.Schedule(now() + cfg_.detection_latency, [this] { Detect(); });
}

void JobRuntime::Detect() {
  detection_scheduled_ = false;
  if (terminated_) return;
  std::set<int> failed;
  for (int f : failed_pending_) {
    if (f < static_cast<int>(tasks_.size()) && task(f).state == TaskState::Failed) failed.insert(f);
  }
  failed_pending_.clear();
  if (failed.empty()) return;
  recovery::FailureEvent ev;
  ev.time = kHour * 1'000'000;
  std::string scope = "task";
  for (int f : failed) {
    const Task& t = task(f);
    ev.failed_tasks.push_back(t.id);
    ev.time = std::min(ev.time, t.failed_at);
    if (t.fail_cause.rfind("tm ", 0) == 0) scope = "tm";
  }
  ev.scope = scope == "tm" ? recovery::FailureEvent::Scope::Tm : recovery::FailureEvent::Scope::Task;
  ev.cause = task(*failed.begin()).fail_cause;
  auto job = std::make_unique<RecoveryJob>();
  job->failure_time = ev.time;
  job->scope = scope;
  job->plan = recovery::PlanRecovery(ev, cfg_.recovery, cfg_.completeness, exec_, regions_, registry_);
  recoveries_.push_back(std::move(job));
  ExecutePlan(*recoveries_.back());
}

void JobRuntime::ExecutePlan(RecoveryJob& job) {
  const auto& plan = job.plan;
  const bool single = plan.strategy == RecoveryStrategy::SingleTask;
  std::set<int> flats;
  for (const auto& id : plan.tasks_to_restart) flats.insert(exec_.Flat(id));
  job.loss_at_start = acct_.dropped_loss;

  for (int f : flats) FailAck(f, "restarting");
  if (attempt_ && !attempt_->finalized && attempt_->mode == checkpoint::CheckpointMode::Global) Finalize();
  MaybeFinalize(false);

  // Records the sources will emit a second time.
  for (int f : flats) {
    const Task& t = task(f);
    if (t.source_index < 0 || single) continue;
    auto it = plan.source_rewind.find(t.source_index);
    std::int64_t rewind = it == plan.source_rewind.end() ? 0 : it->second;
    job.replayed += std::max<std::int64_t>(0, t.st.next_offset - rewind);
  }

  for (int f : flats) {
    Task& t = task(f);
    if (t.state == TaskState::Finished) --finished_count_;
    Cancel(t, single);
  }

  if (!single) {
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      Channel& ch = *channels_[i];
      if (!flats.count(exec_.Flat(ch.consumer()))) continue;
      acct_.rolled_back += ch.RemoveIf([](const Item&) { return true; });
      for (auto& w : ch.TakeWaiters()) {
        if (w.wake) sim_.Schedule(now(), std::move(w.wake));
      }
    }
  } else {
    for (int f : flats) {
      PurgeInputs(task(f), true);
      PurgeOldEpochOutputs(task(f));
    }
  }

  for (int f : flats) {
    Task& t = task(f);
    ++t.epoch;
    t.state = TaskState::Deploying;
    job.waiting.insert(f);
    PlaceTask(f, t.incarnation);
  }
}

void JobRuntime::Cancel(Task& t, bool loss) {
  Renew(t);
  t.state = TaskState::Canceled;
  t.busy = false;
  t.in_service.reset();
  t.in_service_channel = -1;
  t.parked = false;
  t.lazy.reset();
  t.fetching_chunk = -1;
  t.prefetching = false;
  t.frozen = false;
  for (const auto& o : t.pending_out) {
    if (!o.item.is_record()) continue;
    if (loss) {
      ++acct_.dropped_loss;
      ++task(channels_[o.channel]->consumer()).dropped_to;
    } else {
      ++acct_.rolled_back;
    }
  }
  t.pending_out.clear();
  t.blocked = false;
  for (const auto& chans : t.out_channels) {
    for (int c : chans) {
      if (c >= 0) channels_[c]->RemoveWaiters(t.flat);
    }
  }
  t.aligning = -1;
  t.barrier_seen.clear();
  t.next_wake = -1;
  t.eos_sent = false;
  t.finished_handle.reset();
  t.restore_attempts = 0;
}

void JobRuntime::PurgeInputs(Task& t, bool loss) {
  for (int c : t.inputs) {
    Channel& ch = *channels_[c];
    std::int64_t n = ch.RemoveIf([](const Item&) { return true; });
    if (loss) {
      acct_.dropped_loss += n;
      t.dropped_to += n;
    } else {
      acct_.rolled_back += n;
    }
    for (auto& w : ch.TakeWaiters()) {
      if (w.wake) sim_.Schedule(now(), std::move(w.wake));
    }
  }
}

void JobRuntime::PurgeOldEpochOutputs(Task& t) {
  const int epoch = t.epoch;
  for (const auto& chans : t.out_channels) {
    for (int c : chans) {
      if (c < 0) continue;
      Channel& ch = *channels_[c];
      acct_.fenced += ch.RemoveIf([epoch](const Item& it) { return it.producer_epoch <= epoch; });
      for (auto& w : ch.TakeWaiters()) {
        if (w.wake) sim_.Schedule(now(), std::move(w.wake));
      }
    }
  }
}

void JobRuntime::PlaceTask(int flat, std::uint64_t inc) {
  if (flat >= static_cast<int>(tasks_.size()) || task(flat).incarnation != inc) return;
  Task& t = task(flat);
  if (tms_[Value(t.tm)].alive) {
    RestartTask(flat, inc, std::max(now(), tms_[Value(t.tm)].ready_at));
    return;
  }
  SimTime ready = 0;
  TmId tm = AcquireSlot(&ready);
  if (Value(tm) < 0) {
    slot_waiters_.push_back([this, flat, inc] { PlaceTask(flat, inc); });
    return;
  }
  tms_[Value(t.tm)].hosted.erase(flat);
  t.tm = tm;
  tms_[Value(tm)].hosted.insert(flat);
  RestartTask(flat, inc, ready);
}

TmId JobRuntime::AcquireSlot(SimTime* ready) {
  for (auto& tm : tms_) {
    if (!tm.alive || tm.standby) continue;
    int used = 0;
    for (int f : tm.hosted) {
      if (task(f).tm == tm.id) ++used;
    }
    if (used < tm.slots) {
      *ready = std::max(now(), tm.ready_at);
      return tm.id;
    }
  }
  if (spare_capacity_ <= 0) return TmId{-1};
  --spare_capacity_;
  Tm tm;
  tm.id = TmId{static_cast<int>(tms_.size())};
  tm.slots = cfg_.slots_per_tm;
  tm.ready_at = now() + cfg_.cluster.startup.Sample(cluster_rng_);
  tms_.push_back(tm);
  tm_leader_view_.push_back(tm_leader_view_.empty() ? std::nullopt : tm_leader_view_.front());
  *ready = tm.ready_at;
  return tm.id;
}

void JobRuntime::ReturnCapacityLater() {
  sim_.Schedule(now() + cfg_.tm_replace_delay, [this] {
    ++spare_capacity_;
    if (!slot_waiters_.empty()) {
      auto fn = std::move(slot_waiters_.front());
      slot_waiters_.pop_front();
      fn();
    }
  });
}

void JobRuntime::RestartTask(int flat, std::uint64_t inc, SimTime tm_ready) {
  sim_.Schedule(tm_ready, [this, flat, inc] {
    if (flat >= static_cast<int>(tasks_.size()) || task(flat).incarnation != inc) return;
    SimTime deploy = cfg_.cluster.rpc_a + cfg_.cluster.rpc_b;
    sim_.Schedule(now() + deploy, [this, flat, inc] { RestoreTask(flat, inc); });
  });
}

void JobRuntime::RestoreTask(int flat, std::uint64_t inc) {
  if (flat >= static_cast<int>(tasks_.size())) return;
  Task& t = task(flat);
  if (t.incarnation != inc || terminated_) return;
  t.state = TaskState::Recovering;
  if (!store_.available()) {
    SimTime backoff = cfg_.restore_retry << std::min(t.restore_attempts, 6);
    ++t.restore_attempts;
    sim_.Schedule(now() + backoff, [this, flat, inc] { RestoreTask(flat, inc); });
    return;
  }
  const bool single = cfg_.recovery == RecoveryStrategy::SingleTask;
  const std::int64_t resume_offset = t.st.next_offset;
  const SimTime resume_wm = t.st.last_watermark;
  // Output a sink already delivered is not taken back without replay.
  const bool keep_output = single && t.terminal;
  Ledger delivered;
  OffsetSet delivered_seen;
  if (keep_output) {
    delivered = std::move(t.st.ledger);
    delivered_seen = std::move(t.st.seen);
  }

  std::optional<checkpoint::SnapshotHandle> handle;
  const auto& target = registry_.restore_target();
  if (target) {
    int r = regions_.task_to_region[flat];
    if (r < static_cast<int>(target->regions.size())) {
      for (const auto& h : target->regions[r].handles) {
        if (h.task == t.id) handle = h;
      }
    }
  }
  std::int64_t bytes = cfg_.base_state_bytes;
  if (handle) {
    auto blob = std::dynamic_pointer_cast<const TaskSnapshot>(store_.Get(handle->store_key));
    if (!blob) throw EngineError("snapshot payload missing for " + handle->store_key);
    t.st = blob->state;
    bytes = handle->size_bytes;
  } else {
    t.st = OperatorState{};
  }
  t.st.input_watermarks.resize(t.inputs.size(), -1);
  if (keep_output) {
    t.st.ledger = std::move(delivered);
    t.st.seen = std::move(delivered_seen);
  }
  if (single && t.source_index >= 0) {
    // A restarted source continues after the last record it emitted.
    t.st.next_offset = resume_offset;
    t.st.last_watermark = resume_wm;
  }
  t.dirty = t.st.KeyCount();
  t.snapshots_taken = 0;
  t.last_handle.reset();

  checkpoint::RestoreCost cost;
  cost.manifest = store_.model().get_base;
  cost.chunk_fetch = store_.GetLatency(bytes / checkpoint::kLazyChunks);
  SimTime delay = checkpoint::ResumeDelay(cfg_.restore_mode, cost);
  if (cfg_.restore_mode == checkpoint::RestoreMode::Lazy && t.st.KeyCount() > 0) {
    std::map<std::uint64_t, std::int64_t> keys;
    for (const auto& [k, e] : t.st.windows) keys[k.second] += e;
    for (const auto& [k, p] : t.st.pending) keys[k] += 1;
    if (!keep_output) {
      for (const auto& [k, e] : t.st.ledger) keys[k] += e.records;
    }
    t.lazy.emplace(std::move(keys), checkpoint::kLazyChunks);
  }
  sim_.Schedule(now() + delay, [this, flat, inc] { FinishRestore(flat, inc); });
}

void JobRuntime::FinishRestore(int flat, std::uint64_t inc) {
  if (flat >= static_cast<int>(tasks_.size())) return;
  Task& t = task(flat);
  if (t.incarnation != inc || terminated_) return;
  t.state = TaskState::Running;
  t.rr_input = 0;
  t.eos_sent = false;
  t.eos_seen.assign(t.inputs.size(), false);
  for (std::size_t i = 0; i < t.inputs.size(); ++i) {
    const Task& p = task(channels_[t.inputs[i]]->producer());
    if (p.state == TaskState::Finished && p.eos_sent) {
      t.eos_seen[i] = true;
      t.st.input_watermarks[i] = std::numeric_limits<SimTime>::max();
    }
  }
  t.last_aligned = attempt_ ? attempt_->id : 0;
  if (rescaling_ && t.source_index >= 0) t.paused = true;
  OnTaskRunning(t);
  if (t.lazy && !t.lazy->AllResident()) {
    LazyFetch(flat, inc, -1, false);
  } else {
    t.lazy.reset();
  }
  Wake(t, now());
  ScheduleJoinTick(t);
  // A restarted task with every input already closed finishes right away.
  if (t.source_index < 0 && !t.inputs.empty() &&
      std::all_of(t.eos_seen.begin(), t.eos_seen.end(), [](bool b) { return b; })) {
    HandleWatermark(t, 0, std::numeric_limits<SimTime>::max());
    if (!t.terminal) EmitControl(t, ItemKind::EndOfStream, 0);
    t.eos_sent = true;
    if (Flush(t)) MaybeFinish(t);
  }
}

void JobRuntime::OnTaskRunning(Task& t) {
  for (auto& jp : recoveries_) {
    RecoveryJob& job = *jp;
    if (job.done || !job.waiting.erase(t.flat)) continue;
    if (!job.waiting.empty()) continue;
    job.done = true;
    RecoveryLogEntry e;
    e.time = job.failure_time;
    e.scope = job.scope;
    e.strategy = recovery::StrategyName(job.plan.strategy);
    e.tasks = job.plan.tasks_to_restart;
    e.recovery_time = now() - job.failure_time;
    e.completed_at = now();
    e.dropped = acct_.dropped_loss - job.loss_at_start;
    e.replayed = job.replayed;
    metrics_.recoveries.push_back(std::move(e));
  }
}

void JobRuntime::LazyFetch(int flat, std::uint64_t inc, int chunk, bool on_demand) {
  // One fetch in flight per task. A parked record's chunk goes first,
  // otherwise chunks stream in manifest order.
  (void)chunk;
  (void)on_demand;
  Task& t = task(flat);
  if (!t.lazy || t.fetching_chunk >= 0) return;
  int next = -1;
  if (t.parked && t.in_service) {
    if (auto need = t.lazy->NeedsFetch(t.in_service->rec.key)) next = *need;
  }
  if (next < 0) next = t.lazy->NextPrefetch();
  if (next < 0) {
    t.lazy.reset();
    return;
  }
  t.fetching_chunk = next;
  t.prefetching = !t.parked;
  SimTime latency = store_.GetLatency((cfg_.base_state_bytes + t.st.KeyCount() * cfg_.bytes_per_key) /
                                      checkpoint::kLazyChunks);
  sim_.Schedule(now() + latency, [this, flat, inc, next] {
    if (flat >= static_cast<int>(tasks_.size())) return;
    Task& t = task(flat);
    if (t.incarnation != inc || !t.lazy) return;
    t.lazy->Install(next);
    t.fetching_chunk = -1;
    t.prefetching = false;
    if (t.parked && t.in_service && !t.lazy->NeedsFetch(t.in_service->rec.key)) {
      t.parked = false;
      Item it = *t.in_service;
      StartService(t, it);
    }
    LazyFetch(flat, inc, -1, false);
  });
}

bool JobRuntime::TryStandby(Task& t) {
  if (cfg_.replication.mode != recovery::ReplicationMode::ActiveStandby) return false;
  if (!recovery::IsDeterministic(logical_.operators[t.id.op].kind)) return false;
  auto it = standby_of_.find(t.flat);
  if (it == standby_of_.end()) return false;
  TmId sb = it->second;
  if (Value(sb) >= static_cast<int>(tms_.size()) || !tms_[Value(sb)].alive || sb == t.tm) return false;
  if (t.frozen) return false;
  auto rep = recovery::PromoteStandby(true, cfg_.detection_latency, cfg_.replication.standby_lag_records,
                                      t.base_service, t.st.next_offset - 1);
  if (!rep.promoted) return false;
  t.frozen = true;
  Renew(t);
  if (t.busy) {
    // The record in service is redone on the standby.
    t.busy = false;
  }
  standby_of_.erase(it);
  int flat = t.flat;
  std::uint64_t inc = t.incarnation;
  SimTime failed_at = now();
  sim_.Schedule(now() + rep.switch_latency, [this, flat, inc, sb, failed_at] { Unfreeze(flat, inc, sb, failed_at); });
  return true;
}

void JobRuntime::Unfreeze(int flat, std::uint64_t inc, TmId standby, SimTime failed_at) {
  if (flat >= static_cast<int>(tasks_.size())) return;
  Task& t = task(flat);
  if (t.incarnation != inc || !t.frozen) return;
  t.frozen = false;
  tms_[Value(t.tm)].hosted.erase(flat);
  t.tm = standby;
  tms_[Value(standby)].hosted.insert(flat);
  tms_[Value(standby)].standby = false;
  RecoveryLogEntry e;
  e.time = failed_at;
  e.scope = "tm";
  e.strategy = "active_standby";
  e.tasks = {t.id};
  e.recovery_time = now() - failed_at;
  e.completed_at = now();
  e.standby = true;
  metrics_.recoveries.push_back(std::move(e));
  if (t.in_service && !t.parked) {
    Item it = *t.in_service;
    if (t.source_index >= 0) {
      t.in_service.reset();
    } else {
      StartService(t, it);
      return;
    }
  }
  if (!Flush(t)) return;
  if (t.eos_sent) {
    MaybeFinish(t);
    return;
  }
  Wake(t, now());
}

}  // namespace streamlab::runtime
