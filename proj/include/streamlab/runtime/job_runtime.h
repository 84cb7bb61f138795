#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "streamlab/autoscale/autoscaler.h"
#include "streamlab/chaos/fault_plan.h"
#include "streamlab/checkpoint/lazy_state.h"
#include "streamlab/checkpoint/registry.h"
#include "streamlab/checkpoint/snapshot_store.h"
#include "streamlab/common/random.h"
#include "streamlab/control/coordination.h"
#include "streamlab/control/startup.h"
#include "streamlab/graph/graph.h"
#include "streamlab/recovery/recovery_plan.h"
#include "streamlab/recovery/standby.h"
#include "streamlab/runtime/channel.h"
#include "streamlab/runtime/metrics.h"
#include "streamlab/runtime/simulator.h"
#include "streamlab/runtime/source_log.h"
#include "streamlab/runtime/state.h"
#include "streamlab/shuffle/partitioner.h"

namespace streamlab::runtime {

enum class TaskState { Created, Deploying, Running, Failed, Recovering, Canceled, Finished };

std::string TaskStateName(TaskState s);

struct EngineConfig {
  std::uint64_t seed = 0;
  int slots_per_tm = 4;
  int channel_capacity = 32;
  SimTime default_service = 100 * kMicrosecond;
  double service_jitter = 0;  // uniform +-fraction, seeded
  SimTime detection_latency = 500 * kMillisecond;
  SimTime watermark_interval = kSecond;
  SimTime window_size = 5 * kSecond;
  SimTime join_timeout = 30 * kSecond;
  // Sources, one profile per source operator (in operator order).
  std::vector<SourceProfile> sources;

  bool checkpointing = true;
  checkpoint::CheckpointMode checkpoint_mode = checkpoint::CheckpointMode::Global;
  SimTime checkpoint_interval = 30 * kSecond;
  SimTime checkpoint_deadline = 0;  // 0: same as the interval
  bool incremental = true;
  int full_every = 5;
  std::int64_t bytes_per_key = 64;
  std::int64_t base_state_bytes = 1024;
  checkpoint::StoreModel store;
  double p_slow = 0;
  SimTime slow_delay = 0;
  checkpoint::RestoreMode restore_mode = checkpoint::RestoreMode::Eager;

  recovery::RecoveryStrategy recovery = recovery::RecoveryStrategy::FullRestart;
  recovery::Completeness completeness = recovery::Completeness::Full;
  recovery::ReplicationConfig replication;

  control::ClusterModel cluster;  // startup sampler, RPC costs, spare pool
  SimTime tm_replace_delay = 30 * kSecond;
  SimTime restore_retry = kSecond;

  autoscale::AutoscaleConfig autoscale;
  SimTime leader_check_interval = kSecond;
  SimTime jm_failover = kSecond;

  std::size_t max_pending_events = 50'000'000;
};

class JobRuntime : public chaos::FaultSurface {
 public:
  JobRuntime(graph::LogicalGraph logical, EngineConfig cfg);
  ~JobRuntime() override;
  JobRuntime(const JobRuntime&) = delete;
  JobRuntime& operator=(const JobRuntime&) = delete;

  // Deploys every task at the current instant and arms periodic work.
  void Start();
  std::uint64_t RunUntil(SimTime t_end);
  // Runs until all tasks finish, the job is terminated, or t_max.
  bool RunToCompletion(SimTime t_max);

  Simulator& sim() { return sim_; }
  SimTime now() const { return sim_.now(); }
  const EngineConfig& config() const { return cfg_; }
  const graph::ExecutionGraph& exec() const { return exec_; }
  const graph::RegionPartition& regions() const { return regions_; }
  const RuntimeMetrics& metrics() const { return metrics_; }
  RuntimeMetrics& metrics() { return metrics_; }
  checkpoint::CheckpointRegistry& registry() { return registry_; }
  checkpoint::SnapshotStore& store() { return store_; }
  control::CoordinationStore& primary_store() { return zookeeper_; }
  control::CoordinationStore& fallback_store() { return hdfs_leader_; }

  TaskState state(TaskId id) const;
  int epoch(TaskId id) const;
  TmId placement(TaskId id) const;
  int source_index(TaskId id) const;
  std::int64_t source_offset(TaskId id) const;
  std::int64_t consumed_by(TaskId id) const;
  std::int64_t dropped_to(TaskId id) const;
  const Channel& channel(int index) const { return *channels_[index]; }
  int channel_count() const { return static_cast<int>(channels_.size()); }
  bool all_finished() const;
  int source_count() const { return static_cast<int>(logs_.size()); }
  const SourceLog& source_log(int index) const { return logs_[index]; }
  std::int64_t source_next_offset(int index) const { return task(source_tasks_[index]).st.next_offset; }
  bool terminated() const { return terminated_; }
  std::vector<int> parallelism() const;

  Ledger FinalLedger() const;
  Conservation Accounting() const;
  std::uint64_t trace_digest() const { return sim_.trace_digest(); }

  // Manual control used by tests and the autoscaler.
  void FailTask(TaskId id, const std::string& cause);
  std::int64_t TriggerCheckpoint();
  void Rescale(const std::vector<int>& parallelism, const std::string& reason = "manual");
  // Throughput hook consulted at probation end (1.0 = unchanged).
  void set_throughput_scale(double s) { throughput_scale_ = s; }

  // chaos::FaultSurface
  void ScheduleFault(SimTime at, std::function<void()> fn) override;
  std::uint64_t ChaosSeed() const override { return streams_.SubSeed("chaos"); }
  int TmCount() const override { return static_cast<int>(tms_.size()); }
  std::vector<TmId> WorkerTms() const override;
  bool OperatorExists(const std::string& op) const override;
  std::vector<TmId> TmsHostingOp(const std::string& op) const override;
  bool EdgeExists(const std::string& from, const std::string& to) const override;
  bool StoreExists(const std::string& store) const override;
  void KillTm(TmId tm) override;
  void KillJm() override;
  std::pair<double, SimTime> StoreSlow() const override;
  void SetStoreSlow(double p, SimTime delay) override;
  bool StoreAvailable(const std::string& store) const override;
  void SetStoreAvailable(const std::string& store, bool up) override;
  double CpuFactor(TmId tm) const override;
  void SetCpuFactor(TmId tm, double factor) override;
  std::pair<SimTime, double> NetDelay(const std::string& from, const std::string& to) const override;
  void SetNetDelay(const std::string& from, const std::string& to, SimTime added,
                   double capacity_factor) override;

 private:
  struct OutItem {
    int channel;
    Item item;
  };

  struct Task {
    TaskId id;
    int flat = 0;
    TaskState state = TaskState::Created;
    int epoch = 0;
    std::uint64_t incarnation = 0;
    TmId tm{0};
    SimTime base_service = 0;
    bool first_hop = false;
    bool terminal = false;
    int source_index = -1;
    std::vector<int> inputs;                   // channel indices
    std::vector<std::vector<int>> out_channels;  // per out edge: by consumer subtask
    std::vector<int> out_edges;                // logical edge index per out edge slot
    std::vector<shuffle::RouteContext> routers;
    int rr_input = 0;
    bool busy = false;
    std::optional<Item> in_service;
    int in_service_channel = -1;
    SimTime service_started = 0;
    std::deque<OutItem> pending_out;
    bool blocked = false;
    SimTime next_wake = -1;
    // Alignment.
    std::int64_t aligning = -1;
    std::vector<bool> barrier_seen;
    std::vector<bool> eos_seen;
    bool eos_sent = false;
    // Lazy restore.
    std::optional<checkpoint::LazyStateBackend> lazy;
    bool parked = false;
    int fetching_chunk = -1;
    bool prefetching = false;
    // State and snapshots.
    OperatorState st;
    std::int64_t dirty = 0;
    int snapshots_taken = 0;
    std::optional<std::string> last_handle;
    std::optional<checkpoint::SnapshotHandle> finished_handle;
    // Counters.
    std::int64_t processed = 0;
    std::int64_t received = 0;
    SimTime busy_ns = 0;
    std::int64_t dropped_to = 0;
    bool paused = false;
    bool frozen = false;  // standby switchover in progress
    SimTime failed_at = 0;
    std::string fail_cause;
    std::int64_t last_aligned = 0;
    int restore_attempts = 0;
    shuffle::LoadEstimate load_est;
    SimTime load_busy_mark = 0;
    std::mt19937_64 jitter_rng;
  };

  struct Tm {
    TmId id{0};
    bool alive = true;
    double cpu = 1.0;
    int slots = 1;
    std::set<int> hosted;  // flat task indices
    bool standby = false;
    SimTime ready_at = 0;
  };

  struct RecoveryJob {
    SimTime failure_time = 0;
    std::string scope;
    recovery::RecoveryPlan plan;
    std::set<int> waiting;  // flat indices not yet Running
    std::int64_t loss_at_start = 0;
    std::int64_t replayed = 0;
    bool done = false;
  };

  // Construction and data path (job_runtime.cc).
  void Build();
  void BuildTasks(const std::vector<OperatorState>* carry);
  SimTime ServiceTime(Task& t);
  void Wake(Task& t, SimTime at);
  void OnWake(int flat, SimTime at);
  void OnCredit(int flat);
  void TryProcess(Task& t);
  void SourceStep(Task& t);
  void OnSourceEmit(int flat, std::uint64_t inc);
  void OnServiceDone(int flat, std::uint64_t inc);
  void StartService(Task& t, Item item);
  void Apply(Task& t, const Record& rec, std::vector<Record>& out);
  void Deliver(Task& t, const Record& rec);
  void Emit(Task& t, const Record& rec);
  void EmitControl(Task& t, ItemKind kind, std::int64_t marker);
  bool Flush(Task& t);
  bool ConsumerAccepts(const Task& producer, const Task& consumer) const;
  void HandleWatermark(Task& t, int input, SimTime wm);
  void CloseWindows(Task& t, SimTime wm);
  void HandleEos(Task& t, int input);
  void MaybeFinish(Task& t);
  void ExpireJoin(Task& t);
  void ScheduleJoinTick(Task& t);
  void Output(Task& t, const Record& rec);
  void ScheduleSampler(SimTime at);
  void SampleBacklog();
  bool IsFenced(const Item& it, const Channel& ch) const;
  std::int64_t SourceLag(const Task& t) const;

  // Checkpointing (job_checkpointing.cc).
  void ScheduleCheckpoint(SimTime at);
  void OnBarrier(Task& t, int input, std::int64_t id);
  bool AlignmentBlocks(const Task& t, int input) const;
  void CompleteAlignment(Task& t);
  void TakeSnapshot(Task& t);
  void OnAck(int flat, std::uint64_t inc, std::int64_t id, checkpoint::SnapshotHandle handle, int64_t offset);
  void FailAck(int flat, const std::string& cause);
  void MaybeFinalize(bool deadline);
  void Finalize();
  void ReleaseAlignment();
  void CompactStore();
  checkpoint::SnapshotHandle StoreFinished(Task& t);

  // Recovery (job_recovery.cc).
  void MarkFailed(Task& t, const std::string& cause);
  void ScheduleDetection();
  void Detect();
  void ExecutePlan(RecoveryJob& job);
  void Cancel(Task& t, bool loss);
  void RestartTask(int flat, std::uint64_t inc, SimTime tm_ready);
  void RestoreTask(int flat, std::uint64_t inc);
  void FinishRestore(int flat, std::uint64_t inc);
  void OnTaskRunning(Task& t);
  void LazyFetch(int flat, std::uint64_t inc, int chunk, bool on_demand);
  TmId AcquireSlot(SimTime* ready);
  void ReturnCapacityLater();
  bool TryStandby(Task& t);
  void PurgeInputs(Task& t, bool loss);
  void PurgeOldEpochOutputs(Task& t);
  void PlaceTask(int flat, std::uint64_t inc);
  void Unfreeze(int flat, std::uint64_t inc, TmId standby, SimTime failed_at);
  void Renew(Task& t) { t.incarnation = next_incarnation_++; }

  // Control plane: leader, rescale, autoscale (job_control.cc).
  void ScheduleLeaderCheck();
  void LeaderCheck();
  void Terminate(const std::string& reason);
  void ScheduleAutoscale();
  void AutoscaleTick();
  void BeginRescale(std::vector<int> target, const std::string& outcome, const std::string& reason,
                    std::vector<int> decided);
  void CheckQuiescent(std::vector<int> target, SimTime started);
  bool Quiescent() const;
  void FinishRescale(const std::vector<int>& target);
  double Throughput(SimTime window) const;

  Task& task(int flat) { return *tasks_[flat]; }
  const Task& task(int flat) const { return *tasks_[flat]; }
  Task& task(TaskId id) { return *tasks_[exec_.Flat(id)]; }
  const Task& task(TaskId id) const { return *tasks_[exec_.Flat(id)]; }

  graph::LogicalGraph logical_;
  EngineConfig cfg_;
  RngStreams streams_;
  Simulator sim_;
  graph::ExecutionGraph exec_;
  graph::RegionPartition regions_;
  std::vector<std::unique_ptr<Task>> tasks_;
  std::vector<std::unique_ptr<Channel>> channels_;
  std::vector<int> channel_edge_;  // logical edge per channel
  std::vector<Tm> tms_;
  std::vector<SourceLog> logs_;  // by source index
  std::vector<TaskId> source_tasks_;
  std::uint64_t generation_ = 0;  // bumped on rebuild; guards periodic events

  checkpoint::SnapshotStore store_;
  checkpoint::CheckpointRegistry registry_;
  std::optional<checkpoint::CheckpointAttempt> attempt_;
  std::int64_t next_checkpoint_id_ = 1;
  std::uint64_t finalize_token_ = 0;

  std::vector<int> failed_pending_;  // flat indices awaiting detection
  bool detection_scheduled_ = false;
  std::vector<std::unique_ptr<RecoveryJob>> recoveries_;
  int spare_capacity_ = 0;
  std::deque<std::function<void()>> slot_waiters_;
  std::mt19937_64 cluster_rng_;

  control::CoordinationStore zookeeper_{"zookeeper", control::StoreRole::Primary};
  control::CoordinationStore hdfs_leader_{"hdfs", control::StoreRole::Fallback};
  bool orchestrator_up_ = true;
  std::vector<std::optional<control::LeaderRecord>> tm_leader_view_;
  bool jm_alive_ = true;
  std::int64_t term_ = 1;
  bool terminated_ = false;

  std::optional<autoscale::MetricWindow> window_;
  autoscale::Smoother smoother_;
  std::optional<autoscale::SafetyGuard> guard_;
  std::vector<std::int64_t> last_processed_;
  std::vector<std::int64_t> last_received_;
  std::vector<SimTime> last_busy_;
  std::vector<std::int64_t> last_arrived_;
  bool rescaling_ = false;
  double throughput_scale_ = 1.0;
  std::vector<std::pair<SimTime, std::int64_t>> qps_marks_;

  std::map<std::pair<std::string, std::string>, std::pair<SimTime, double>> net_faults_;

  bool has_windows_ = false;
  std::uint64_t next_incarnation_ = 1;
  std::set<std::string> uncompacted_;
  std::map<int, TmId> standby_of_;  // flat -> standby TM

  Conservation acct_;
  int finished_count_ = 0;
  RuntimeMetrics metrics_;
  bool started_ = false;
};

}  // namespace streamlab::runtime
