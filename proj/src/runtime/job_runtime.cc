#include "streamlab/runtime/job_runtime.h"

#include <algorithm>
#include <limits>

namespace streamlab::runtime {

namespace {

constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

}  // namespace

std::string TaskStateName(TaskState s) {
  switch (s) {
    case TaskState::Created: return "created";
    case TaskState::Deploying: return "deploying";
    case TaskState::Running: return "running";
    case TaskState::Failed: return "failed";
    case TaskState::Recovering: return "recovering";
    case TaskState::Canceled: return "canceled";
    case TaskState::Finished: return "finished";
  }
  return "?";
}

JobRuntime::JobRuntime(graph::LogicalGraph logical, EngineConfig cfg)
    : logical_(std::move(logical)),
      cfg_(std::move(cfg)),
      streams_(cfg_.seed),
      sim_(cfg_.max_pending_events),
      store_(cfg_.store, streams_.SubSeed("store")),
      cluster_rng_(streams_.SubSeed("cluster")) {
  logical_.Validate();
  if (cfg_.slots_per_tm < 1) throw ConfigError("slots_per_tm must be >= 1");
  if (cfg_.channel_capacity < 1) throw ConfigError("channel_capacity must be >= 1");
  if (cfg_.checkpoint_interval <= 0) throw ConfigError("checkpoint interval must be positive");
  if (cfg_.full_every < 1) throw ConfigError("full_every must be >= 1");
  if (cfg_.recovery == recovery::RecoveryStrategy::SingleTask &&
      cfg_.completeness == recovery::Completeness::Full) {
    throw ConfigError("single_task recovery requires partial completeness");
  }
  if (cfg_.checkpoint_deadline <= 0) cfg_.checkpoint_deadline = cfg_.checkpoint_interval;
  store_.SetSlow(cfg_.p_slow, cfg_.slow_delay);
  Build();
}

JobRuntime::~JobRuntime() = default;

void JobRuntime::Build() {
  exec_ = graph::Expand(logical_, cfg_.slots_per_tm);
  regions_ = graph::DeriveRegions(exec_);
  registry_.Reset(regions_.count());

  int source_ops = 0;
  for (std::size_t op = 0; op < logical_.operators.size(); ++op) {
    const auto& spec = logical_.operators[op];
    if (spec.kind == graph::OperatorKind::WindowCount) has_windows_ = true;
    if (!logical_.IsSource(static_cast<int>(op))) continue;
    if (cfg_.sources.empty()) throw ConfigError("no source profile configured");
    const SourceProfile& prof =
        cfg_.sources[std::min<std::size_t>(source_ops, cfg_.sources.size() - 1)];
    for (int s = 0; s < spec.parallelism; ++s) {
      int index = static_cast<int>(logs_.size());
      SourceProfile sp = prof;
      if (sp.key_mode == KeyMode::Offset) sp.key_base += static_cast<std::uint64_t>(s) << 40;
      logs_.emplace_back(sp, streams_.SubSeed("source", index));
      source_tasks_.push_back(TaskId{static_cast<int>(op), s});
    }
    ++source_ops;
  }

  for (int i = 0; i < exec_.num_tms; ++i) {
    Tm tm;
    tm.id = TmId{i};
    tm.slots = cfg_.slots_per_tm;
    tms_.push_back(tm);
  }
  if (cfg_.replication.mode == recovery::ReplicationMode::ActiveStandby) {
    if (cfg_.replication.standby.empty()) {
      // One standby TM per worker TM.
      int workers = exec_.num_tms;
      for (int i = 0; i < workers; ++i) {
        Tm tm;
        tm.id = TmId{workers + i};
        tm.slots = cfg_.slots_per_tm;
        tm.standby = true;
        tms_.push_back(tm);
      }
      for (int f = 0; f < exec_.task_count(); ++f) {
        standby_of_[f] = TmId{workers + Value(exec_.placement[f])};
      }
    } else {
      for (const auto& [id, tm] : cfg_.replication.standby) {
        if (id.op < 0 || id.op >= static_cast<int>(logical_.operators.size()) || id.subtask < 0 ||
            id.subtask >= logical_.operators[id.op].parallelism) {
          throw ConfigError("standby mapping names an unknown task");
        }
        while (static_cast<int>(tms_.size()) <= Value(tm)) {
          Tm extra;
          extra.id = TmId{static_cast<int>(tms_.size())};
          extra.slots = cfg_.slots_per_tm;
          extra.standby = true;
          tms_.push_back(extra);
        }
        standby_of_[exec_.Flat(id)] = tm;
      }
    }
  }
  spare_capacity_ = cfg_.cluster.spares;
  tm_leader_view_.assign(tms_.size(), std::nullopt);
  BuildTasks(nullptr);
}

void JobRuntime::BuildTasks(const std::vector<OperatorState>* carry) {
  tasks_.clear();
  channels_.clear();
  channel_edge_.clear();
  for (auto& tm : tms_) tm.hosted.clear();

  for (const auto& c : exec_.channels) {
    channels_.push_back(std::make_unique<Channel>(c.producer, c.consumer, cfg_.channel_capacity));
    channel_edge_.push_back(c.edge);
  }
  // Re-apply active network faults to the new channels.
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& e = logical_.edges[channel_edge_[i]];
    for (const auto& [key, val] : net_faults_) {
      if ((key.first.empty() || key.first == e.from) && (key.second.empty() || key.second == e.to)) {
        channels_[i]->set_delay(val.first);
        channels_[i]->set_capacity_factor(val.second);
      }
    }
  }

  int source_counter = 0;
  for (int f = 0; f < exec_.task_count(); ++f) {
    auto t = std::make_unique<Task>();
    t->id = exec_.At(f);
    t->flat = f;
    Renew(*t);
    const auto& spec = logical_.operators[t->id.op];
    bool is_source = logical_.IsSource(t->id.op);
    t->base_service = spec.service_time > 0 ? spec.service_time : (is_source ? 0 : cfg_.default_service);
    t->terminal = logical_.IsTerminal(t->id.op);
    for (int e : logical_.Upstream(t->id.op)) {
      if (logical_.IsSource(logical_.IndexOf(logical_.edges[e].from))) t->first_hop = true;
    }
    if (is_source) t->source_index = source_counter++;
    t->tm = exec_.placement[f];
    t->jitter_rng = streams_.Stream("jitter", static_cast<std::uint64_t>(f) + (generation_ << 32));
    tasks_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& c = exec_.channels[i];
    task(c.consumer).inputs.push_back(static_cast<int>(i));
  }
  for (auto& tp : tasks_) {
    Task& t = *tp;
    for (int e : logical_.Downstream(t.id.op)) {
      int down_op = logical_.IndexOf(logical_.edges[e].to);
      int down = logical_.operators[down_op].parallelism;
      t.out_edges.push_back(e);
      t.out_channels.emplace_back(down, -1);
      shuffle::RouteContext ctx;
      ctx.producer = t.id.subtask;
      ctx.up = logical_.operators[t.id.op].parallelism;
      ctx.down = down;
      ctx.backlog.assign(down, 0);
      ctx.load.assign(down, 0.0);
      ctx.counter = static_cast<std::uint64_t>(t.id.subtask);
      ctx.seed = 0;
      t.routers.push_back(std::move(ctx));
    }
  }
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& c = exec_.channels[i];
    Task& p = task(c.producer);
    for (std::size_t slot = 0; slot < p.out_edges.size(); ++slot) {
      if (p.out_edges[slot] == c.edge) p.out_channels[slot][c.consumer.subtask] = static_cast<int>(i);
    }
  }
  for (auto& tp : tasks_) {
    Task& t = *tp;
    if (carry != nullptr) t.st = (*carry)[t.flat];
    t.st.input_watermarks.resize(t.inputs.size(), -1);
    t.eos_seen.assign(t.inputs.size(), false);
    tms_[Value(t.tm)].hosted.insert(t.flat);
  }
}

void JobRuntime::Start() {
  if (started_) return;
  started_ = true;
  control::LeaderRecord rec{"jm-1", term_, now()};
  control::PublishLeader(zookeeper_, hdfs_leader_, rec);
  for (auto& v : tm_leader_view_) v = rec;
  for (auto& tp : tasks_) {
    Task& t = *tp;
    t.state = TaskState::Running;
    Wake(t, now());
    ScheduleJoinTick(t);
  }
  if (cfg_.checkpointing) ScheduleCheckpoint(now() + cfg_.checkpoint_interval);
  ScheduleSampler(now() + kSecond);
  ScheduleLeaderCheck();
  if (cfg_.autoscale.enabled) {
    window_.emplace(static_cast<int>(logical_.operators.size()), cfg_.autoscale.window);
    guard_.emplace(cfg_.autoscale);
    ScheduleAutoscale();
  }
}

std::uint64_t JobRuntime::RunUntil(SimTime t_end) {
  if (!started_) Start();
  return sim_.RunUntil(t_end);
}

bool JobRuntime::RunToCompletion(SimTime t_max) {
  if (!started_) Start();
  sim_.RunWhile(t_max, [this] { return !terminated_ && !all_finished(); });
  return !terminated_ && all_finished();
}

// --- queries -------------------------------------------------------------

TaskState JobRuntime::state(TaskId id) const { return task(id).state; }
int JobRuntime::epoch(TaskId id) const { return task(id).epoch; }
TmId JobRuntime::placement(TaskId id) const { return task(id).tm; }
int JobRuntime::source_index(TaskId id) const { return task(id).source_index; }
std::int64_t JobRuntime::source_offset(TaskId id) const { return task(id).st.next_offset; }
std::int64_t JobRuntime::consumed_by(TaskId id) const { return task(id).received; }
std::int64_t JobRuntime::dropped_to(TaskId id) const { return task(id).dropped_to; }

bool JobRuntime::all_finished() const {
  return finished_count_ == static_cast<int>(tasks_.size());
}

std::vector<int> JobRuntime::parallelism() const {
  std::vector<int> p;
  for (const auto& op : logical_.operators) p.push_back(op.parallelism);
  return p;
}

Ledger JobRuntime::FinalLedger() const {
  Ledger out;
  for (const auto& t : tasks_) {
    if (t->terminal) MergeLedger(out, t->st.ledger);
  }
  return out;
}

Conservation JobRuntime::Accounting() const {
  Conservation c = acct_;
  c.in_flight = 0;
  for (const auto& ch : channels_) c.in_flight += ch->backlog();
  for (const auto& t : tasks_) {
    for (const auto& o : t->pending_out) {
      if (o.item.is_record()) ++c.in_flight;
    }
  }
  return c;
}

// --- data path -----------------------------------------------------------

SimTime JobRuntime::ServiceTime(Task& t) {
  double d = static_cast<double>(t.base_service) * tms_[Value(t.tm)].cpu;
  if (cfg_.service_jitter > 0) {
    std::uniform_real_distribution<double> u(-cfg_.service_jitter, cfg_.service_jitter);
    d *= 1.0 + u(t.jitter_rng);
  }
  return std::max<SimTime>(0, static_cast<SimTime>(d));
}

void JobRuntime::Wake(Task& t, SimTime at) {
  if (at < now()) at = now();
  if (t.next_wake >= 0 && t.next_wake <= at) return;
  t.next_wake = at;
  int flat = t.flat;
  sim_.Schedule(at, [this, flat, at] { OnWake(flat, at); });
}

void JobRuntime::OnWake(int flat, SimTime at) {
  if (flat >= static_cast<int>(tasks_.size())) return;
  Task& t = task(flat);
  if (t.next_wake == at) t.next_wake = -1;
  if (t.source_index >= 0) {
    SourceStep(t);
  } else {
    TryProcess(t);
  }
}

void JobRuntime::OnCredit(int flat) {
  if (flat >= static_cast<int>(tasks_.size())) return;
  Task& t = task(flat);
  if (t.state != TaskState::Running || t.frozen) return;
  if (!Flush(t)) return;
  if (t.eos_sent) {
    MaybeFinish(t);
    return;
  }
  if (t.source_index >= 0) {
    SourceStep(t);
  } else {
    TryProcess(t);
  }
}

bool JobRuntime::IsFenced(const Item& it, const Channel& ch) const {
  return it.producer_epoch < task(ch.producer()).epoch;
}

void JobRuntime::TryProcess(Task& t) {
  if (t.state != TaskState::Running || t.busy || t.blocked || !t.pending_out.empty() || t.parked ||
      t.frozen || t.source_index >= 0) {
    return;
  }
  const int n = static_cast<int>(t.inputs.size());
  while (true) {
    SimTime earliest = kNever;
    int pick = -1;
    for (int k = 0; k < n; ++k) {
      int i = (t.rr_input + k) % n;
      Channel& ch = *channels_[t.inputs[i]];
      if (ch.empty() || AlignmentBlocks(t, i)) continue;
      SimTime vis = ch.Front().visible_at;
      if (vis > now()) {
        earliest = std::min(earliest, vis);
        continue;
      }
      pick = i;
      break;
    }
    if (pick < 0) {
      if (earliest != kNever) Wake(t, earliest);
      return;
    }
    t.rr_input = (pick + 1) % n;
    Channel& ch = *channels_[t.inputs[pick]];
    std::optional<Channel::Waiter> woken;
    Item it = ch.Pop(&woken);
    if (woken && woken->wake) sim_.Schedule(now(), std::move(woken->wake));
    if (IsFenced(it, ch)) {
      if (it.is_record()) ++acct_.fenced;
      continue;
    }
    switch (it.kind) {
      case ItemKind::Record: {
        ++acct_.consumed;
        ++t.received;
        if (t.lazy) {
          if (auto chunk = t.lazy->NeedsFetch(it.rec.key)) {
            t.in_service = it;
            t.in_service_channel = t.inputs[pick];
            t.parked = true;
            LazyFetch(t.flat, t.incarnation, *chunk, true);
            return;
          }
        }
        t.in_service_channel = t.inputs[pick];
        StartService(t, it);
        return;
      }
      case ItemKind::Barrier:
        OnBarrier(t, pick, it.marker);
        break;
      case ItemKind::Watermark:
        HandleWatermark(t, pick, it.marker);
        break;
      case ItemKind::EndOfStream:
        HandleEos(t, pick);
        break;
    }
    if (!Flush(t)) return;
    if (t.eos_sent) {
      MaybeFinish(t);
      return;
    }
    if (t.state != TaskState::Running) return;
  }
}

void JobRuntime::StartService(Task& t, Item item) {
  t.busy = true;
  t.in_service = std::move(item);
  t.service_started = now();
  int flat = t.flat;
  std::uint64_t inc = t.incarnation;
  sim_.Schedule(now() + ServiceTime(t), [this, flat, inc] { OnServiceDone(flat, inc); });
}

void JobRuntime::OnServiceDone(int flat, std::uint64_t inc) {
  if (flat >= static_cast<int>(tasks_.size())) return;
  Task& t = task(flat);
  if (t.incarnation != inc || !t.busy) return;
  t.busy = false;
  t.busy_ns += now() - t.service_started;
  ++t.processed;
  Record rec = t.in_service->rec;
  t.in_service.reset();
  t.in_service_channel = -1;
  if (t.first_hop) metrics_.CountQps(now());
  std::vector<Record> out;
  Apply(t, rec, out);
  for (const auto& r : out) Output(t, r);
  if (Flush(t)) TryProcess(t);
}

void JobRuntime::Apply(Task& t, const Record& rec, std::vector<Record>& out) {
  const auto& spec = logical_.operators[t.id.op];
  switch (spec.kind) {
    case graph::OperatorKind::Source:
    case graph::OperatorKind::Lookup:
    case graph::OperatorKind::Sink:
      out.push_back(rec);
      break;
    case graph::OperatorKind::Filter: {
      std::uint64_t h = Mix64((static_cast<std::uint64_t>(rec.source) << 40) ^
                              static_cast<std::uint64_t>(rec.offset) ^ Mix64(Fnv1a(spec.id)));
      if (UnitDouble(h) < spec.selectivity) out.push_back(rec);
      break;
    }
    case graph::OperatorKind::WindowCount: {
      SimTime w = cfg_.window_size;
      SimTime end = (rec.event_time / w + 1) * w;
      if (end <= t.st.output_watermark) {
        ++metrics_.inherent_misses;  // late record
        break;
      }
      t.st.windows[{end, rec.key}] += rec.value;
      ++t.dirty;
      break;
    }
    case graph::OperatorKind::Join: {
      JoinPending& p = t.st.pending[rec.key];
      bool other = rec.side == 0 ? p.has_b : p.has_a;
      if (other) {
        Record j = rec;
        j.emit_time = std::min(p.emit_time, rec.emit_time);
        if (rec.side != 0) j.source = -1;
        t.st.pending.erase(rec.key);
        out.push_back(j);
      } else {
        if (rec.side == 0) {
          p.has_a = true;
        } else {
          p.has_b = true;
        }
        p.since = now();
        p.emit_time = rec.emit_time;
      }
      ++t.dirty;
      break;
    }
  }
}

void JobRuntime::Output(Task& t, const Record& rec) {
  if (t.terminal) {
    Deliver(t, rec);
  } else {
    Emit(t, rec);
  }
}

void JobRuntime::Deliver(Task& t, const Record& rec) {
  LedgerEntry& e = t.st.ledger[rec.key];
  ++e.records;
  e.value_sum += rec.value;
  e.digest += Mix64(Mix64(static_cast<std::uint64_t>(rec.value)) ^
                    (static_cast<std::uint64_t>(rec.source) << 48) ^
                    static_cast<std::uint64_t>(rec.offset));
  if (rec.source >= 0 && !t.st.seen.Insert(rec.source, rec.offset)) ++metrics_.duplicates;
  ++t.dirty;
  metrics_.CountOutput(now());
  metrics_.AddLatency(now(), now() - rec.emit_time);
}

void JobRuntime::Emit(Task& t, const Record& rec) {
  for (std::size_t slot = 0; slot < t.out_edges.size(); ++slot) {
    const auto& strategy = logical_.edges[t.out_edges[slot]].strategy;
    shuffle::RouteContext& ctx = t.routers[slot];
    const auto& chans = t.out_channels[slot];
    if (strategy.kind == shuffle::StrategyKind::BacklogAware) {
      for (int j = 0; j < ctx.down; ++j) {
        ctx.backlog[j] = chans[j] >= 0 ? channels_[chans[j]]->backlog() : std::numeric_limits<int>::max();
      }
    } else if (strategy.kind == shuffle::StrategyKind::WeakHash) {
      for (int j = 0; j < ctx.down; ++j) {
        if (chans[j] < 0) continue;
        ctx.load[j] = task(channels_[chans[j]]->consumer()).load_est.value();
      }
    }
    int j = shuffle::Route(strategy, ctx, rec.key);
    if (j < 0 || j >= ctx.down || chans[j] < 0) throw EngineError("routing chose an unconnected subtask");
    Item it;
    it.kind = ItemKind::Record;
    it.rec = rec;
    t.pending_out.push_back({chans[j], it});
    ++acct_.emitted;
  }
}

void JobRuntime::EmitControl(Task& t, ItemKind kind, std::int64_t marker) {
  for (const auto& chans : t.out_channels) {
    for (int c : chans) {
      if (c < 0) continue;
      Item it;
      it.kind = kind;
      it.marker = marker;
      t.pending_out.push_back({c, it});
    }
  }
}

bool JobRuntime::ConsumerAccepts(const Task& producer, const Task& consumer) const {
  (void)producer;
  if (consumer.state == TaskState::Canceled || consumer.state == TaskState::Finished) return false;
  if (cfg_.recovery == recovery::RecoveryStrategy::SingleTask && consumer.state != TaskState::Running) {
    return false;
  }
  return true;
}

bool JobRuntime::Flush(Task& t) {
  while (!t.pending_out.empty()) {
    OutItem& o = t.pending_out.front();
    Channel& ch = *channels_[o.channel];
    Task& c = task(ch.consumer());
    if (!ConsumerAccepts(t, c)) {
      if (o.item.is_record()) {
        ++acct_.dropped_loss;
        ++c.dropped_to;
      }
      t.pending_out.pop_front();
      continue;
    }
    o.item.producer_epoch = t.epoch;
    o.item.visible_at = now() + ch.delay();
    int flat = t.flat;
    if (t.blocked) ch.RemoveWaiters(flat);
    Channel::Waiter w{flat, [this, flat] { OnCredit(flat); }};
    if (ch.Send(o.item, std::move(w)) == SendOutcome::Blocked) {
      t.blocked = true;
      return false;
    }
    SimTime vis = o.item.visible_at;
    t.pending_out.pop_front();
    if (c.state == TaskState::Running && !c.busy) Wake(c, vis);
  }
  t.blocked = false;
  return true;
}

void JobRuntime::HandleWatermark(Task& t, int input, SimTime wm) {
  auto& iw = t.st.input_watermarks;
  iw[input] = std::max(iw[input], wm);
  SimTime low = kNever;
  for (std::size_t i = 0; i < iw.size(); ++i) low = std::min(low, iw[i]);
  if (low == kNever || low <= t.st.output_watermark) {
    if (low == kNever && t.st.output_watermark != kNever) {
      t.st.output_watermark = kNever;
      CloseWindows(t, kNever);
    }
    return;
  }
  t.st.output_watermark = low;
  if (logical_.operators[t.id.op].kind == graph::OperatorKind::WindowCount) CloseWindows(t, low);
  if (!t.terminal) EmitControl(t, ItemKind::Watermark, low);
}

void JobRuntime::CloseWindows(Task& t, SimTime wm) {
  auto& w = t.st.windows;
  while (!w.empty() && w.begin()->first.first <= wm) {
    const auto& [key, count] = *w.begin();
    Record r;
    r.key = key.second;
    r.value = count;
    r.event_time = key.first;
    r.emit_time = now();
    r.source = -1;
    r.offset = key.first;
    Output(t, r);
    w.erase(w.begin());
    ++t.dirty;
  }
}

void JobRuntime::HandleEos(Task& t, int input) {
  if (t.eos_seen[input]) return;
  t.eos_seen[input] = true;
  HandleWatermark(t, input, kNever);
  if (t.aligning >= 0) {
    bool done = true;
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
      if (!t.barrier_seen[i] && !t.eos_seen[i]) done = false;
    }
    if (done) CompleteAlignment(t);
  }
  if (std::all_of(t.eos_seen.begin(), t.eos_seen.end(), [](bool b) { return b; }) && !t.eos_sent) {
    if (!t.terminal) EmitControl(t, ItemKind::EndOfStream, 0);
    t.eos_sent = true;
  }
}

void JobRuntime::MaybeFinish(Task& t) {
  if (t.state != TaskState::Running || !t.eos_sent || t.busy || !t.pending_out.empty() || t.frozen) return;
  t.state = TaskState::Finished;
  ++finished_count_;
  if (attempt_ && !attempt_->finalized &&
      attempt_->per_task[t.flat].status == checkpoint::AckStatus::Pending) {
    auto h = StoreFinished(t);
    auto& ack = attempt_->per_task[t.flat];
    ack.status = checkpoint::AckStatus::Acked;
    ack.handle = h;
    ack.source_index = t.source_index;
    ack.source_offset = t.st.next_offset;
    MaybeFinalize(false);
  }
}

// --- sources -------------------------------------------------------------

void JobRuntime::SourceStep(Task& t) {
  if (t.state != TaskState::Running || t.busy || t.blocked || !t.pending_out.empty() || t.paused ||
      t.frozen || t.eos_sent) {
    return;
  }
  const SourceLog& log = logs_[t.source_index];
  std::int64_t off = t.st.next_offset;
  if (off >= log.size()) {
    EmitControl(t, ItemKind::EndOfStream, 0);
    t.eos_sent = true;
    if (Flush(t)) MaybeFinish(t);
    return;
  }
  SimTime arr = log.ArrivalTime(off);
  if (arr > now()) {
    Wake(t, arr);
    return;
  }
  t.busy = true;
  t.service_started = now();
  int flat = t.flat;
  std::uint64_t inc = t.incarnation;
  sim_.Schedule(now() + ServiceTime(t), [this, flat, inc] { OnSourceEmit(flat, inc); });
}

void JobRuntime::OnSourceEmit(int flat, std::uint64_t inc) {
  if (flat >= static_cast<int>(tasks_.size())) return;
  Task& t = task(flat);
  if (t.incarnation != inc || !t.busy) return;
  t.busy = false;
  t.busy_ns += now() - t.service_started;
  const SourceLog& log = logs_[t.source_index];
  std::int64_t off = t.st.next_offset++;
  ++t.processed;
  ++metrics_.source_records;
  if (log.Present(off)) {
    Record r;
    r.key = log.KeyOf(off);
    r.value = 1;
    r.event_time = log.ArrivalTime(off);
    r.emit_time = now();
    r.source = t.source_index;
    r.offset = off;
    r.side = static_cast<std::uint8_t>(log.profile().side);
    Output(t, r);
    if (has_windows_) {
      SimTime wm = (r.event_time / cfg_.watermark_interval) * cfg_.watermark_interval;
      if (wm > t.st.last_watermark) {
        t.st.last_watermark = wm;
        EmitControl(t, ItemKind::Watermark, wm);
      }
    }
  }
  if (Flush(t)) SourceStep(t);
}

std::int64_t JobRuntime::SourceLag(const Task& t) const {
  if (t.source_index < 0) return 0;
  const SourceLog& log = logs_[t.source_index];
  return std::max<std::int64_t>(0, log.CountBy(now()) - t.st.next_offset);
}

// --- periodic ------------------------------------------------------------

void JobRuntime::ScheduleSampler(SimTime at) {
  sim_.Schedule(at, [this] {
    if (terminated_ || all_finished()) return;
    SampleBacklog();
    ScheduleSampler(now() + kSecond);
  });
}

void JobRuntime::SampleBacklog() {
  std::int64_t total = 0;
  for (const auto& ch : channels_) total += ch->backlog();
  for (const auto& tp : tasks_) {
    Task& t = *tp;
    total += SourceLag(t);
    SimTime busy = t.busy_ns + (t.busy ? now() - t.service_started : 0);
    double frac = std::clamp(static_cast<double>(busy - t.load_busy_mark) / kSecond, 0.0, 1.0);
    t.load_busy_mark = busy;
    t.load_est.Observe(frac);
  }
  metrics_.backlog.push_back(total);
}

void JobRuntime::ScheduleJoinTick(Task& t) {
  if (logical_.operators[t.id.op].kind != graph::OperatorKind::Join) return;
  int flat = t.flat;
  std::uint64_t inc = t.incarnation;
  sim_.Schedule(now() + kSecond, [this, flat, inc] {
    if (flat >= static_cast<int>(tasks_.size())) return;
    Task& t = task(flat);
    if (t.incarnation != inc || t.state != TaskState::Running) return;
    if (terminated_ || all_finished()) return;
    ExpireJoin(t);
    ScheduleJoinTick(t);
  });
}

void JobRuntime::ExpireJoin(Task& t) {
  for (auto it = t.st.pending.begin(); it != t.st.pending.end();) {
    if (now() - it->second.since >= cfg_.join_timeout) {
      ++metrics_.inherent_misses;
      it = t.st.pending.erase(it);
      ++t.dirty;
    } else {
      ++it;
    }
  }
}

// --- fault surface -------------------------------------------------------

void JobRuntime::ScheduleFault(SimTime at, std::function<void()> fn) {
  sim_.Schedule(at, [this, fn = std::move(fn)] {
    if (!terminated_) fn();
  });
}

std::vector<TmId> JobRuntime::WorkerTms() const {
  std::vector<TmId> out;
  for (const auto& tm : tms_) {
    if (tm.alive && !tm.standby && !tm.hosted.empty()) out.push_back(tm.id);
  }
  return out;
}

bool JobRuntime::OperatorExists(const std::string& op) const { return logical_.IndexOf(op) >= 0; }

std::vector<TmId> JobRuntime::TmsHostingOp(const std::string& op) const {
  int idx = logical_.IndexOf(op);
  std::set<int> ids;
  for (const auto& t : tasks_) {
    if (t->id.op == idx && tms_[Value(t->tm)].alive) ids.insert(Value(t->tm));
  }
  std::vector<TmId> out;
  for (int i : ids) out.push_back(TmId{i});
  return out;
}

bool JobRuntime::EdgeExists(const std::string& from, const std::string& to) const {
  if (from.empty() && to.empty()) return true;
  for (const auto& e : logical_.edges) {
    if (e.from == from && e.to == to) return true;
  }
  return false;
}

bool JobRuntime::StoreExists(const std::string& s) const {
  return s == "hdfs" || s == "zookeeper" || s == "orchestrator";
}

std::pair<double, SimTime> JobRuntime::StoreSlow() const { return {store_.p_slow(), store_.slow_delay()}; }

void JobRuntime::SetStoreSlow(double p, SimTime delay) { store_.SetSlow(p, delay); }

bool JobRuntime::StoreAvailable(const std::string& s) const {
  if (s == "hdfs") return store_.available();
  if (s == "zookeeper") return zookeeper_.available();
  if (s == "orchestrator") return orchestrator_up_;
  return false;
}

void JobRuntime::SetStoreAvailable(const std::string& s, bool up) {
  if (s == "hdfs") {
    store_.SetAvailable(up);
    hdfs_leader_.SetAvailable(up);
  } else if (s == "zookeeper") {
    zookeeper_.SetAvailable(up);
  } else if (s == "orchestrator") {
    orchestrator_up_ = up;
  }
}

double JobRuntime::CpuFactor(TmId tm) const { return tms_.at(Value(tm)).cpu; }

void JobRuntime::SetCpuFactor(TmId tm, double factor) { tms_.at(Value(tm)).cpu = factor; }

std::pair<SimTime, double> JobRuntime::NetDelay(const std::string& from, const std::string& to) const {
  auto it = net_faults_.find({from, to});
  if (it == net_faults_.end()) return {0, 1.0};
  return it->second;
}

void JobRuntime::SetNetDelay(const std::string& from, const std::string& to, SimTime added,
                             double capacity_factor) {
  if (added == 0 && capacity_factor == 1.0) {
    net_faults_.erase({from, to});
  } else {
    net_faults_[{from, to}] = {added, capacity_factor};
  }
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& e = logical_.edges[channel_edge_[i]];
    if ((from.empty() || from == e.from) && (to.empty() || to == e.to)) {
      channels_[i]->set_delay(added);
      channels_[i]->set_capacity_factor(capacity_factor);
      if (channels_[i]->credits() > 0) {
        for (auto& w : channels_[i]->TakeWaiters()) {
          if (w.wake) sim_.Schedule(now(), std::move(w.wake));
        }
      }
    }
  }
}

}  // namespace streamlab::runtime
