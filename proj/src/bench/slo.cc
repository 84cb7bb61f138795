#include "streamlab/bench/slo.h"

#include <cmath>

#include "streamlab/bench/metrics.h"

namespace streamlab::bench {

SloTarget SloPreset(const std::string& name) {
  using recovery::Completeness;
  SloTarget s;
  if (name == "ideal") {
    s = {Completeness::Full, 2 * kSecond, kSecond, 0};
  } else if (name == "latency_critical") {
    s = {Completeness::Partial, 2 * kSecond, kSecond, 10'000};
  } else if (name == "revenue_critical" || name == "data_sync") {
    s = {Completeness::Full, 5 * kSecond, kMinute, 0};
  } else if (name == "log_analytics") {
    s = {Completeness::Partial, 5 * kSecond, kMinute, 10'000};
  } else if (name == "warehouse") {
    s = {Completeness::Full, kMinute, kHour, 0};
  } else {
    throw ConfigError("unknown slo preset '" + name + "'");
  }
  return s;
}

SloTarget SloFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("slo must be an object");
  SloTarget s = j.contains("preset") ? SloPreset(j["preset"].get<std::string>()) : SloTarget{};
  try {
    if (j.contains("gamma")) s.gamma = recovery::ParseCompleteness(j["gamma"].get<std::string>());
    if (j.contains("lambda_max_ms")) {
      s.lambda_max = static_cast<SimTime>(std::llround(j["lambda_max_ms"].get<double>() * kMillisecond));
    }
    if (j.contains("tau_max_s")) s.tau_max = static_cast<SimTime>(std::llround(j["tau_max_s"].get<double>() * kSecond));
    s.max_dropped = j.value("max_dropped", s.max_dropped);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("slo: ") + e.what());
  }
  if (s.lambda_max <= 0 || s.tau_max <= 0 || s.max_dropped < 0) throw ConfigError("slo bounds must be positive");
  return s;
}

nlohmann::json SloToJson(const SloTarget& s) {
  return {{"gamma", recovery::CompletenessName(s.gamma)},
          {"lambda_max_ms", ToMillis(s.lambda_max)},
          {"tau_max_s", ToSeconds(s.tau_max)},
          {"max_dropped", s.max_dropped}};
}

SloVerdict EvaluateSlo(const MetricsReport& report, const SloTarget& target) {
  if (!report.valid) throw VerdictError("report is invalid: " + report.error);
  if (target.lambda_max <= 0 || target.tau_max <= 0 || target.max_dropped < 0) {
    throw VerdictError("slo target bounds must be positive");
  }
  SloVerdict v;
  v.dropped = report.records_dropped;
  v.p99_outside_recovery = report.latency_p99_outside_recovery;
  v.max_recovery_time = report.max_recovery_time();

  std::string why;
  if (report.terminated) {
    v.completeness_ok = false;
    why += "job terminated before delivering all records; ";
  } else if (target.gamma == recovery::Completeness::Full) {
    v.completeness_ok = v.dropped == 0;
    if (!v.completeness_ok) why += "full completeness required but " + std::to_string(v.dropped) + " records dropped; ";
  } else {
    v.completeness_ok = v.dropped <= target.max_dropped;
    if (!v.completeness_ok) {
      why += std::to_string(v.dropped) + " records dropped, bound " + std::to_string(target.max_dropped) + "; ";
    }
  }
  v.latency_ok = v.p99_outside_recovery <= target.lambda_max;
  if (!v.latency_ok) {
    why += "p99 latency " + std::to_string(ToMillis(v.p99_outside_recovery)) + " ms exceeds " +
           std::to_string(ToMillis(target.lambda_max)) + " ms; ";
  }
  v.recovery_ok = v.max_recovery_time <= target.tau_max;
  if (!v.recovery_ok) {
    why += "recovery took " + std::to_string(ToSeconds(v.max_recovery_time)) + " s, bound " +
           std::to_string(ToSeconds(target.tau_max)) + " s; ";
  }
  v.overall = v.completeness_ok && v.latency_ok && v.recovery_ok;
  if (why.size() >= 2) why.resize(why.size() - 2);
  v.explanation = v.overall ? "all bounds met" : why;
  return v;
}

nlohmann::json VerdictToJson(const SloVerdict& v, const SloTarget& target) {
  return {{"completeness_ok", v.completeness_ok},
          {"latency_ok", v.latency_ok},
          {"recovery_ok", v.recovery_ok},
          {"overall", v.overall},
          {"dropped", v.dropped},
          {"p99_outside_recovery_ms", ToMillis(v.p99_outside_recovery)},
          {"max_recovery_time_s", ToSeconds(v.max_recovery_time)},
          {"explanation", v.explanation},
          {"target", SloToJson(target)}};
}

}  // namespace streamlab::bench
