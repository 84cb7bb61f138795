#pragma once

#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "streamlab/common/types.h"
#include "streamlab/graph/graph.h"

namespace streamlab::autoscale {

struct AutoscaleConfig {
  bool enabled = false;
  SimTime interval = 10 * kSecond;
  int window = 5;
  double source_busy_correction = 1.0;  // c
  double saturation = 0.95;             // s_sat
  double beta = 1.2;
  double rho = 0.8;
  int probation_intervals = 2;
  SimTime cooldown = 5 * kMinute;
  // Time-of-day ranges [start, end) in which downscaling is suppressed.
  std::vector<std::pair<SimTime, SimTime>> freeze;
  double max_step = 2.0;
  int breaker_k = 3;
  SimTime breaker_reset = 0;  // 0: manual reset only
  int max_changes_per_hour = 12;
  int min_parallelism = 1;
  int max_parallelism = 256;
};

AutoscaleConfig AutoscaleConfigFromJson(const nlohmann::json& j);
nlohmann::json AutoscaleConfigToJson(const AutoscaleConfig& c);

struct OperatorSample {
  double input_rate = 0;      // rec/s arriving (log rate for sources)
  double processed_rate = 0;  // rec/s completed by all instances
  double busy = 0;            // mean busy fraction per instance
  double backlog = 0;
};

class MetricWindow {
 public:
  MetricWindow(int operators, int window) : window_(window), samples_(operators) {}
  void Push(int op, const OperatorSample& s);
  void Clear();
  bool Full() const;
  int window() const { return window_; }
  const std::deque<OperatorSample>& samples(int op) const { return samples_[op]; }
  int operators() const { return static_cast<int>(samples_.size()); }

 private:
  int window_;
  std::vector<std::deque<OperatorSample>> samples_;
};

struct Signals {
  std::vector<double> true_rate;  // per instance, rec/s
  std::vector<bool> valid;
  std::vector<double> input_rate;  // mean observed input rate
  std::vector<double> mean_busy;
};

// Holds the last accepted signal per operator so a rejected sample can fall
// back to it.
class Smoother {
 public:
  Signals Smooth(const MetricWindow& w, const graph::LogicalGraph& g, const std::vector<int>& parallelism,
                 const AutoscaleConfig& cfg);

 private:
  std::vector<std::optional<double>> previous_;
};

struct ScalingDecision {
  std::vector<int> target;
  std::vector<std::string> reasons;
  SimTime time = 0;
};

ScalingDecision TargetParallelism(const Signals& signals, const graph::LogicalGraph& g,
                                  const std::vector<int>& current, const AutoscaleConfig& cfg,
                                  SimTime now = 0);

enum class ApplyKind { Applied, Deferred, RolledBack, BreakerOpen, Unchanged };

std::string ApplyKindName(ApplyKind k);

struct ApplyOutcome {
  ApplyKind kind = ApplyKind::Unchanged;
  std::string reason;
  std::vector<int> parallelism;  // vector in force after this outcome
};

class SafetyGuard {
 public:
  explicit SafetyGuard(AutoscaleConfig cfg) : cfg_(std::move(cfg)) {}

  ApplyOutcome GuardAndApply(const ScalingDecision& decision, const std::vector<int>& current,
                             double throughput, SimTime now);
  // Ends probation when due: RolledBack if throughput fell below rho * pre.
  std::optional<ApplyOutcome> CheckProbation(double throughput, SimTime now);
  // A rescale that could not be executed counts as a failed apply.
  void ReportApplyFailure(SimTime now);
  void ResetBreaker();

  bool BreakerOpen(SimTime now);
  bool InProbation() const { return probation_end_.has_value(); }
  bool InFreeze(SimTime now) const;
  int consecutive_failures() const { return failures_; }
  SimTime last_change() const { return last_change_; }

 private:
  void NoteFailure(SimTime now);

  AutoscaleConfig cfg_;
  std::optional<SimTime> probation_end_;
  std::vector<int> prior_;
  double pre_throughput_ = 0;
  SimTime last_change_ = -(SimTime{1} << 60);
  std::deque<SimTime> changes_;
  int failures_ = 0;
  std::optional<SimTime> breaker_opened_;
};

}  // namespace streamlab::autoscale
