#include <algorithm>
#include <cmath>

#include "streamlab/runtime/job_runtime.h"

namespace streamlab::runtime {

// --- leader --------------------------------------------------------------

void JobRuntime::ScheduleLeaderCheck() {
  sim_.Schedule(now() + cfg_.leader_check_interval, [this] {
    if (terminated_ || all_finished()) return;
    LeaderCheck();
    ScheduleLeaderCheck();
  });
}

void JobRuntime::LeaderCheck() {
  if (tm_leader_view_.size() < tms_.size()) tm_leader_view_.resize(tms_.size());
  for (std::size_t i = 0; i < tms_.size(); ++i) {
    const Tm& tm = tms_[i];
    if (!tm.alive || tm.hosted.empty()) continue;
    auto res = control::ResolveLeader(zookeeper_, hdfs_leader_, tm_leader_view_[i]);
    if (res.status == control::ResolveStatus::TerminateJobs) {
      Terminate("tm " + std::to_string(i) + ": " + res.reason);
      return;
    }
  }
}

void JobRuntime::Terminate(const std::string& reason) {
  if (terminated_) return;
  terminated_ = true;
  ++metrics_.terminations;
  metrics_.warnings.push_back("job terminated: " + reason);
  if (attempt_ && !attempt_->finalized) Finalize();
  for (auto& tp : tasks_) {
    Task& t = *tp;
    if (t.state == TaskState::Finished) continue;
    Renew(t);
    t.state = TaskState::Canceled;
    t.busy = false;
  }
}

// --- autoscale -----------------------------------------------------------

void JobRuntime::ScheduleAutoscale() {
  sim_.Schedule(now() + cfg_.autoscale.interval, [this] {
    if (terminated_ || all_finished()) return;
    AutoscaleTick();
    ScheduleAutoscale();
  });
}

double JobRuntime::Throughput(SimTime window) const {
  std::int64_t end = now() / kSecond;  // exclusive bucket index
  std::int64_t begin = std::max<std::int64_t>(0, end - window / kSecond);
  if (end <= begin) return 0;
  std::int64_t sum = 0;
  for (std::int64_t b = begin; b < end && b < static_cast<std::int64_t>(metrics_.qps.size()); ++b) {
    sum += metrics_.qps[b];
  }
  return static_cast<double>(sum) / static_cast<double>(end - begin);
}

void JobRuntime::AutoscaleTick() {
  const int ops = static_cast<int>(logical_.operators.size());
  const auto current = parallelism();
  metrics_.parallelism_series.push_back(current);
  if (rescaling_) return;

  // Per-operator deltas since the previous tick.
  std::vector<std::int64_t> processed(ops, 0), received(ops, 0), arrived(ops, 0);
  std::vector<SimTime> busy(ops, 0);
  std::vector<std::int64_t> backlog(ops, 0);
  bool any_finished = false;
  for (const auto& tp : tasks_) {
    const Task& t = *tp;
    int op = t.id.op;
    processed[op] += t.processed;
    received[op] += t.received;
    busy[op] += t.busy_ns + (t.busy ? now() - t.service_started : 0);
    if (t.source_index >= 0) arrived[op] += logs_[t.source_index].CountBy(now());
    for (int c : t.inputs) backlog[op] += channels_[c]->backlog();
    if (t.state == TaskState::Finished) any_finished = true;
  }
  if (last_processed_.size() != static_cast<std::size_t>(ops)) {
    last_processed_.assign(ops, 0);
    last_received_.assign(ops, 0);
    last_busy_.assign(ops, 0);
    last_arrived_.assign(ops, 0);
  }
  const double secs = ToSeconds(cfg_.autoscale.interval);
  for (int op = 0; op < ops; ++op) {
    autoscale::OperatorSample s;
    s.processed_rate = static_cast<double>(processed[op] - last_processed_[op]) / secs;
    s.input_rate = logical_.IsSource(op) ? static_cast<double>(arrived[op] - last_arrived_[op]) / secs
                                         : static_cast<double>(received[op] - last_received_[op]) / secs;
    s.busy = static_cast<double>(busy[op] - last_busy_[op]) /
             (static_cast<double>(cfg_.autoscale.interval) * current[op]);
    s.busy = std::clamp(s.busy, 0.0, 1.0);
    s.backlog = static_cast<double>(backlog[op]);
    window_->Push(op, s);
  }
  last_processed_ = processed;
  last_received_ = received;
  last_busy_ = busy;
  last_arrived_ = arrived;

  const double throughput = Throughput(cfg_.autoscale.interval) * throughput_scale_;
  if (guard_->InProbation()) {
    if (auto out = guard_->CheckProbation(throughput, now())) {
      if (out->kind == autoscale::ApplyKind::RolledBack) {
        BeginRescale(out->parallelism, "rolled_back", out->reason, out->parallelism);
        return;
      }
    }
  }
  if (!window_->Full() || any_finished) return;
  auto signals = smoother_.Smooth(*window_, logical_, current, cfg_.autoscale);
  auto decision = autoscale::TargetParallelism(signals, logical_, current, cfg_.autoscale, now());
  auto outcome = guard_->GuardAndApply(decision, current, throughput, now());
  std::string reason = outcome.reason;
  if (reason.empty()) {
    for (const auto& r : decision.reasons) {
      if (r.empty()) continue;
      reason += (reason.empty() ? "" : "; ") + r;
    }
  }
  switch (outcome.kind) {
    case autoscale::ApplyKind::Unchanged:
      return;
    case autoscale::ApplyKind::Applied:
      BeginRescale(outcome.parallelism, "applied", reason, decision.target);
      return;
    default: {
      ScaleLogEntry e;
      e.time = now();
      e.outcome = autoscale::ApplyKindName(outcome.kind);
      e.reason = reason;
      e.before = current;
      e.target = decision.target;
      e.after = current;
      metrics_.scaling.push_back(std::move(e));
      return;
    }
  }
}

// --- rescale -------------------------------------------------------------

void JobRuntime::Rescale(const std::vector<int>& parallelism, const std::string& reason) {
  if (!started_) Start();
  BeginRescale(parallelism, "manual", reason, parallelism);
}

void JobRuntime::BeginRescale(std::vector<int> target, const std::string& outcome, const std::string& reason,
                              std::vector<int> decided) {
  if (rescaling_ || terminated_) return;
  const auto before = parallelism();
  if (target.size() != before.size()) throw EngineError("rescale vector has the wrong length");
  for (std::size_t op = 0; op < target.size(); ++op) {
    if (logical_.IsSource(static_cast<int>(op))) target[op] = before[op];
    if (target[op] < 1) throw EngineError("rescale to parallelism < 1");
  }
  // Validate the new shape before pausing anything.
  graph::LogicalGraph next = logical_;
  for (std::size_t op = 0; op < target.size(); ++op) next.operators[op].parallelism = target[op];
  try {
    graph::Expand(next, cfg_.slots_per_tm);
  } catch (const Error& e) {
    ScaleLogEntry entry;
    entry.time = now();
    entry.outcome = "failed";
    entry.reason = e.what();
    entry.before = before;
    entry.target = decided;
    entry.after = before;
    metrics_.scaling.push_back(std::move(entry));
    if (guard_) guard_->ReportApplyFailure(now());
    return;
  }
  rescaling_ = true;
  if (attempt_ && !attempt_->finalized) {
    for (std::size_t f = 0; f < attempt_->per_task.size(); ++f) FailAck(static_cast<int>(f), "rescale");
    Finalize();
  }
  for (auto& tp : tasks_) {
    if (tp->source_index >= 0) tp->paused = true;
  }
  ScaleLogEntry entry;
  entry.time = now();
  entry.outcome = outcome;
  entry.reason = reason;
  entry.before = before;
  entry.target = decided;
  entry.after = target;
  metrics_.scaling.push_back(std::move(entry));
  CheckQuiescent(std::move(target), now());
}

bool JobRuntime::Quiescent() const {
  for (const auto& ch : channels_) {
    if (!ch->empty()) return false;
  }
  for (const auto& t : tasks_) {
    if (t->busy || t->parked || t->frozen) return false;
    if (!t->pending_out.empty()) return false;
    if (t->state != TaskState::Running && t->state != TaskState::Finished) return false;
  }
  return true;
}

void JobRuntime::CheckQuiescent(std::vector<int> target, SimTime started) {
  if (terminated_) return;
  if (!Quiescent()) {
    sim_.Schedule(now() + 10 * kMillisecond,
                  [this, target = std::move(target), started]() mutable { CheckQuiescent(std::move(target), started); });
    return;
  }
  FinishRescale(target);
}

namespace {

// Merges the state of every old subtask of one operator.
OperatorState MergeStates(const std::vector<const OperatorState*>& parts) {
  OperatorState m;
  SimTime wm = std::numeric_limits<SimTime>::max();
  for (const auto* p : parts) {
    for (const auto& [k, v] : p->windows) m.windows[k] += v;
    for (const auto& [k, v] : p->pending) {
      auto& q = m.pending[k];
      q.has_a = q.has_a || v.has_a;
      q.has_b = q.has_b || v.has_b;
      q.since = std::max(q.since, v.since);
      q.emit_time = std::max(q.emit_time, v.emit_time);
    }
    MergeLedger(m.ledger, p->ledger);
    m.seen.Merge(p->seen);
    wm = std::min(wm, p->output_watermark);
    m.next_offset = std::max(m.next_offset, p->next_offset);
    m.last_watermark = std::max(m.last_watermark, p->last_watermark);
  }
  m.output_watermark = parts.empty() ? -1 : wm;
  return m;
}

}  // namespace

void JobRuntime::FinishRescale(const std::vector<int>& target) {
  const auto before = parallelism();
  const int ops = static_cast<int>(logical_.operators.size());
  const int held = static_cast<int>(std::count_if(tms_.begin(), tms_.end(), [](const Tm& tm) {
    return tm.alive && !tm.standby && !tm.hosted.empty();
  }));

  // Old state per operator, keyed state re-split by key hash.
  std::vector<std::vector<OperatorState>> old(ops);
  for (const auto& tp : tasks_) {
    old[tp->id.op].push_back(tp->st);
  }

  for (int op = 0; op < ops; ++op) logical_.operators[op].parallelism = target[op];
  ++generation_;
  exec_ = graph::Expand(logical_, cfg_.slots_per_tm);
  regions_ = graph::DeriveRegions(exec_);

  std::vector<OperatorState> carry(exec_.task_count());
  for (int op = 0; op < ops; ++op) {
    const int p = target[op];
    const int base = exec_.op_offset[op];
    if (p == before[op]) {
      for (int s = 0; s < p; ++s) carry[base + s] = old[op][s];
      continue;
    }
    std::vector<const OperatorState*> parts;
    for (const auto& s : old[op]) parts.push_back(&s);
    OperatorState merged = MergeStates(parts);
    for (int s = 0; s < p; ++s) {
      OperatorState& st = carry[base + s];
      st.output_watermark = merged.output_watermark;
      st.seen = merged.seen;
    }
    auto owner = [p](std::uint64_t key) { return static_cast<int>(shuffle::StableHash(key, 0) % p); };
    for (const auto& [k, v] : merged.windows) carry[base + owner(k.second)].windows[k] = v;
    for (const auto& [k, v] : merged.pending) carry[base + owner(k)].pending[k] = v;
    for (const auto& [k, v] : merged.ledger) carry[base + owner(k)].ledger[k] = v;
  }
  for (int f = 0; f < exec_.task_count(); ++f) {
    OperatorState& st = carry[f];
    // Every input starts at the operator's merged low watermark.
    SimTime wm = st.output_watermark;
    std::size_t inputs = 0;
    for (const auto& c : exec_.channels) {
      if (exec_.Flat(c.consumer) == f) ++inputs;
    }
    st.input_watermarks.assign(inputs, wm);
  }

  // Placement: reuse live worker TMs in id order, then add more.
  std::vector<TmId> pool;
  for (const auto& tm : tms_) {
    if (tm.alive && !tm.standby) pool.push_back(tm.id);
  }
  while (static_cast<int>(pool.size()) < exec_.num_tms) {
    Tm tm;
    tm.id = TmId{static_cast<int>(tms_.size())};
    tm.slots = cfg_.slots_per_tm;
    tms_.push_back(tm);
    pool.push_back(tm.id);
  }
  for (auto& pl : exec_.placement) pl = pool[Value(pl)];
  tm_leader_view_.resize(tms_.size(), tm_leader_view_.empty() ? std::nullopt : tm_leader_view_.front());
  if (cfg_.replication.mode == recovery::ReplicationMode::ActiveStandby) standby_of_.clear();

  BuildTasks(&carry);
  finished_count_ = 0;
  attempt_.reset();
  recoveries_.clear();
  failed_pending_.clear();

  // Savepoint taken at the quiescent cut becomes the restore target.
  registry_.Reset(regions_.count());
  const std::int64_t sp_id = next_checkpoint_id_++;
  std::vector<checkpoint::RegionEntry> entries(regions_.count());
  for (auto& e : entries) e.checkpoint_id = sp_id;
  for (auto& tp : tasks_) {
    Task& t = *tp;
    checkpoint::SnapshotHandle h;
    h.task = t.id;
    h.checkpoint_id = sp_id;
    h.store_key = "savepoint/" + std::to_string(generation_) + "/" + std::to_string(t.id.op) + "/" +
                  std::to_string(t.id.subtask);
    h.size_bytes = cfg_.base_state_bytes + t.st.KeyCount() * cfg_.bytes_per_key;
    store_.CompletePut(h.store_key, h.size_bytes, std::make_shared<const TaskSnapshot>(t.st));
    auto& e = entries[regions_.task_to_region[t.flat]];
    e.handles.push_back(h);
    if (t.source_index >= 0) e.source_offsets[t.source_index] = t.st.next_offset;
    t.state = TaskState::Deploying;
    t.paused = true;
    t.dirty = t.st.KeyCount();
  }
  checkpoint::GlobalCheckpointRecord rec;
  rec.id = sp_id;
  for (int r = 0; r < regions_.count(); ++r) {
    registry_.RecordSuccess(r, entries[r]);
    rec.regions.push_back(entries[r]);
  }
  registry_.SetRestoreTarget(std::move(rec));
  if (window_) window_->Clear();
  last_processed_.clear();

  control::StartupOptions opts;
  auto report = control::HotUpdate(held, exec_, cfg_.cluster, opts, streams_.SubSeed("rescale", generation_));
  const std::uint64_t gen = generation_;
  sim_.Schedule(now() + report.total_ns, [this, gen] {
    if (gen != generation_ || terminated_) return;
    for (auto& tp : tasks_) {
      Task& t = *tp;
      t.state = TaskState::Running;
      t.paused = false;
      // Sources that had already drained stay drained.
      Wake(t, now());
      ScheduleJoinTick(t);
    }
    rescaling_ = false;
  });
}

}  // namespace streamlab::runtime
