#include "streamlab/autoscale/autoscaler.h"

#include <algorithm>
#include <cmath>

#include "streamlab/common/duration.h"

namespace streamlab::autoscale {

AutoscaleConfig AutoscaleConfigFromJson(const nlohmann::json& j) {
  AutoscaleConfig c;
  if (!j.is_object()) return c;
  auto seconds = [](const nlohmann::json& v) {
    return v.is_string() ? ParseDuration(v.get<std::string>())
                         : static_cast<SimTime>(std::llround(v.get<double>() * kSecond));
  };
  c.enabled = j.value("enabled", c.enabled);
  if (j.contains("interval_s")) c.interval = seconds(j["interval_s"]);
  c.window = j.value("window", c.window);
  c.source_busy_correction = j.value("c", c.source_busy_correction);
  c.saturation = j.value("s_sat", c.saturation);
  c.beta = j.value("beta", c.beta);
  c.rho = j.value("rho", c.rho);
  c.probation_intervals = j.value("probation_intervals", c.probation_intervals);
  if (j.contains("cooldown_s")) c.cooldown = seconds(j["cooldown_s"]);
  if (j.contains("freeze")) {
    for (const auto& w : j["freeze"]) {
      c.freeze.emplace_back(ParseClockOfDay(w.at(0).get<std::string>()),
                            ParseClockOfDay(w.at(1).get<std::string>()));
    }
  }
  c.max_step = j.value("max_step", c.max_step);
  c.breaker_k = j.value("breaker_k", c.breaker_k);
  if (j.contains("breaker_reset_s")) c.breaker_reset = seconds(j["breaker_reset_s"]);
  c.max_changes_per_hour = j.value("max_changes_per_hour", c.max_changes_per_hour);
  c.min_parallelism = j.value("min_parallelism", c.min_parallelism);
  c.max_parallelism = j.value("max_parallelism", c.max_parallelism);
  if (c.window < 1) throw ConfigError("autoscale.window must be >= 1");
  if (c.rho <= 0 || c.rho >= 1) throw ConfigError("autoscale.rho must be in (0,1)");
  if (c.breaker_k < 1) throw ConfigError("autoscale.breaker_k must be >= 1");
  if (c.max_step < 1) throw ConfigError("autoscale.max_step must be >= 1");
  return c;
}

namespace {

std::string ClockText(SimTime t) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld", static_cast<long long>(t / kHour),
                static_cast<long long>((t % kHour) / kMinute));
  return buf;
}

}  // namespace

nlohmann::json AutoscaleConfigToJson(const AutoscaleConfig& c) {
  nlohmann::json freeze = nlohmann::json::array();
  for (const auto& [a, b] : c.freeze) freeze.push_back({ClockText(a), ClockText(b)});
  return {{"enabled", c.enabled},
          {"interval_s", ToSeconds(c.interval)},
          {"window", c.window},
          {"c", c.source_busy_correction},
          {"s_sat", c.saturation},
          {"beta", c.beta},
          {"rho", c.rho},
          {"probation_intervals", c.probation_intervals},
          {"cooldown_s", ToSeconds(c.cooldown)},
          {"freeze", freeze},
          {"max_step", c.max_step},
          {"breaker_k", c.breaker_k},
          {"breaker_reset_s", ToSeconds(c.breaker_reset)},
          {"max_changes_per_hour", c.max_changes_per_hour},
          {"min_parallelism", c.min_parallelism},
          {"max_parallelism", c.max_parallelism}};
}

void MetricWindow::Push(int op, const OperatorSample& s) {
  auto& q = samples_[op];
  q.push_back(s);
  while (static_cast<int>(q.size()) > window_) q.pop_front();
}

void MetricWindow::Clear() {
  for (auto& q : samples_) q.clear();
}

bool MetricWindow::Full() const {
  for (const auto& q : samples_) {
    if (static_cast<int>(q.size()) < window_) return false;
  }
  return true;
}

Signals Smoother::Smooth(const MetricWindow& w, const graph::LogicalGraph& g,
                         const std::vector<int>& parallelism, const AutoscaleConfig& cfg) {
  int n = w.operators();
  if (static_cast<int>(previous_.size()) != n) previous_.assign(n, std::nullopt);
  Signals s;
  s.true_rate.assign(n, 0);
  s.valid.assign(n, false);
  s.input_rate.assign(n, 0);
  s.mean_busy.assign(n, 0);
  for (int op = 0; op < n; ++op) {
    const auto& q = w.samples(op);
    if (q.empty()) throw ConfigError("metric window is empty");
    double in = 0, processed = 0, busy = 0;
    for (const auto& x : q) {
      in += x.input_rate;
      processed += x.processed_rate;
      busy += x.busy;
    }
    in /= static_cast<double>(q.size());
    processed /= static_cast<double>(q.size());
    busy /= static_cast<double>(q.size());
    if (g.IsSource(op)) busy *= cfg.source_busy_correction;
    busy = std::clamp(busy, 0.0, 1.0);
    s.input_rate[op] = in;
    s.mean_busy[op] = busy;
    double eff = busy >= cfg.saturation ? 1.0 : busy;
    if (eff <= 0) {
      if (processed > 0 && previous_[op]) {
        s.true_rate[op] = *previous_[op];
        s.valid[op] = true;
      }
      continue;
    }
    if (processed <= 0) continue;
    double rate = processed / eff / std::max(1, parallelism[op]);
    s.true_rate[op] = rate;
    s.valid[op] = true;
    previous_[op] = rate;
  }
  return s;
}

ScalingDecision TargetParallelism(const Signals& signals, const graph::LogicalGraph& g,
                                  const std::vector<int>& current, const AutoscaleConfig& cfg,
                                  SimTime now) {
  ScalingDecision d;
  d.time = now;
  int n = static_cast<int>(g.operators.size());
  d.target = current;
  d.reasons.assign(n, "");
  std::vector<double> demand(n, 0);
  for (int op : g.TopologicalOrder()) {
    if (g.IsSource(op)) {
      demand[op] = signals.input_rate[op] * cfg.beta;
      d.reasons[op] = "source";
      continue;
    }
    for (int e : g.Upstream(op)) {
      int u = g.IndexOf(g.edges[e].from);
      demand[op] += demand[u] * g.operators[u].selectivity;
    }
    if (!signals.valid[op] || signals.true_rate[op] <= 0) {
      d.reasons[op] = "unscalable";
      continue;
    }
    int p = static_cast<int>(std::ceil(demand[op] / signals.true_rate[op] - 1e-9));
    p = std::clamp(p, cfg.min_parallelism, cfg.max_parallelism);
    d.target[op] = p;
    d.reasons[op] = p > current[op] ? "up" : p < current[op] ? "down" : "hold";
  }
  return d;
}

std::string ApplyKindName(ApplyKind k) {
  switch (k) {
    case ApplyKind::Applied: return "applied";
    case ApplyKind::Deferred: return "deferred";
    case ApplyKind::RolledBack: return "rolled_back";
    case ApplyKind::BreakerOpen: return "breaker_open";
    case ApplyKind::Unchanged: return "unchanged";
  }
  return "?";
}

bool SafetyGuard::InFreeze(SimTime now) const {
  SimTime tod = now % (24 * kHour);
  for (const auto& [a, b] : cfg_.freeze) {
    if (a <= b ? (tod >= a && tod < b) : (tod >= a || tod < b)) return true;
  }
  return false;
}

bool SafetyGuard::BreakerOpen(SimTime now) {
  if (!breaker_opened_) return false;
  if (cfg_.breaker_reset > 0 && now - *breaker_opened_ >= cfg_.breaker_reset) {
    ResetBreaker();
    return false;
  }
  return true;
}

void SafetyGuard::ResetBreaker() {
  breaker_opened_.reset();
  failures_ = 0;
}

void SafetyGuard::NoteFailure(SimTime now) {
  ++failures_;
  if (failures_ >= cfg_.breaker_k && !breaker_opened_) breaker_opened_ = now;
}

void SafetyGuard::ReportApplyFailure(SimTime now) {
  probation_end_.reset();
  NoteFailure(now);
}

ApplyOutcome SafetyGuard::GuardAndApply(const ScalingDecision& decision, const std::vector<int>& current,
                                        double throughput, SimTime now) {
  ApplyOutcome out;
  out.parallelism = current;
  if (BreakerOpen(now)) {
    out.kind = ApplyKind::BreakerOpen;
    out.reason = "breaker";
    return out;
  }
  if (probation_end_) {
    out.kind = ApplyKind::Deferred;
    out.reason = "probation";
    return out;
  }
  std::vector<int> target = decision.target;
  if (target == current) {
    out.kind = ApplyKind::Unchanged;
    return out;
  }
  if (now - last_change_ < cfg_.cooldown) {
    out.kind = ApplyKind::Deferred;
    out.reason = "cooldown";
    return out;
  }
  if (InFreeze(now)) {
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = std::max(target[i], current[i]);
    if (target == current) {
      out.kind = ApplyKind::Deferred;
      out.reason = "freeze";
      return out;
    }
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    int hi = static_cast<int>(std::floor(current[i] * cfg_.max_step + 1e-9));
    int lo = static_cast<int>(std::ceil(current[i] / cfg_.max_step - 1e-9));
    target[i] = std::clamp(target[i], std::max(1, lo), std::max(1, hi));
  }
  while (!changes_.empty() && now - changes_.front() >= kHour) changes_.pop_front();
  if (static_cast<int>(changes_.size()) >= cfg_.max_changes_per_hour) {
    out.kind = ApplyKind::Deferred;
    out.reason = "rate_limit";
    return out;
  }
  prior_ = current;
  pre_throughput_ = throughput;
  probation_end_ = now + cfg_.probation_intervals * cfg_.interval;
  last_change_ = now;
  changes_.push_back(now);
  out.kind = ApplyKind::Applied;
  out.parallelism = target;
  return out;
}

std::optional<ApplyOutcome> SafetyGuard::CheckProbation(double throughput, SimTime now) {
  if (!probation_end_ || now < *probation_end_) return std::nullopt;
  probation_end_.reset();
  if (throughput < cfg_.rho * pre_throughput_) {
    ApplyOutcome out;
    out.kind = ApplyKind::RolledBack;
    out.reason = "degraded";
    out.parallelism = prior_;
    last_change_ = now;
    changes_.push_back(now);
    NoteFailure(now);
    return out;
  }
  failures_ = 0;
  return std::nullopt;
}

}  // namespace streamlab::autoscale
