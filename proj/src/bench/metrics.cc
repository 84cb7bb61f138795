#include "streamlab/bench/metrics.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace streamlab::bench {

namespace {

std::string Hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double Ms(SimTime t) { return ToMillis(t); }

void WriteFile(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw EngineError("cannot write " + p.string());
  out << text;
}

}  // namespace

SimTime MetricsReport::max_recovery_time() const {
  SimTime m = 0;
  for (const auto& r : recoveries) m = std::max(m, r.recovery_time);
  return m;
}

std::uint64_t LedgerDigest(const runtime::Ledger& l) {
  std::uint64_t h = 0x1234abcdULL;
  for (const auto& [k, e] : l) {
    h = Mix64(h ^ Mix64(k));
    h = Mix64(h ^ static_cast<std::uint64_t>(e.records));
    h = Mix64(h ^ static_cast<std::uint64_t>(e.value_sum));
    h = Mix64(h ^ e.digest);
  }
  return h;
}

MetricsReport Collect(runtime::JobRuntime& rt, bool completed, const CollectOptions& opts) {
  MetricsReport r;
  const auto& m = rt.metrics();
  r.completed = completed;
  r.terminated = rt.terminated();
  r.end_time = rt.now();
  r.qps = m.qps;
  r.output = m.output;
  r.backlog = m.backlog;

  // Recovery windows, in 1 s buckets, are excluded from the latency bound.
  std::vector<std::pair<SimTime, SimTime>> windows;
  for (const auto& e : m.recoveries) windows.emplace_back(e.time, e.completed_at + opts.recovery_grace);
  runtime::LatencyHistogram all, outside;
  for (std::size_t b = 0; b < m.latency.size(); ++b) {
    const auto& h = m.latency[b];
    r.p99_series.push_back(h ? h->Percentile(0.99) : 0);
    if (!h) continue;
    all.Merge(*h);
    SimTime lo = static_cast<SimTime>(b) * kSecond, hi = lo + kSecond;
    bool in_window = std::any_of(windows.begin(), windows.end(),
                                 [&](const auto& w) { return lo < w.second && hi > w.first; });
    if (!in_window) outside.Merge(*h);
  }
  r.latency_p50 = all.Percentile(0.5);
  r.latency_p99 = all.Percentile(0.99);
  r.latency_p99_outside_recovery = outside.Percentile(0.99);

  std::int64_t begin = opts.window_begin / kSecond;
  std::int64_t end = (opts.window_end > 0 ? opts.window_end : rt.now()) / kSecond;
  end = std::min<std::int64_t>(end, static_cast<std::int64_t>(r.qps.size()));
  if (end > begin) {
    std::int64_t sum = 0, mn = INT64_MAX;
    for (std::int64_t b = begin; b < end; ++b) {
      sum += r.qps[b];
      mn = std::min(mn, r.qps[b]);
    }
    r.qps_mean = static_cast<double>(sum) / static_cast<double>(end - begin);
    r.qps_min = mn;
    double best = -1;
    for (std::int64_t b = begin; b + 10 <= end; b += 10) {
      std::int64_t s = 0;
      for (std::int64_t k = b; k < b + 10; ++k) s += r.qps[k];
      double mean = static_cast<double>(s) / 10.0;
      if (best < 0 || mean < best) best = mean;
    }
    r.qps_min_10s = best < 0 ? r.qps_mean : best;
  }

  r.checkpoints = m.checkpoints;
  r.checkpoint_attempts = static_cast<std::int64_t>(m.checkpoints.size());
  for (const auto& c : m.checkpoints) {
    if (c.success) ++r.checkpoint_successes;
    if (r.region_successes.size() < c.region_success.size()) r.region_successes.resize(c.region_success.size(), 0);
    for (std::size_t i = 0; i < c.region_success.size(); ++i) r.region_successes[i] += c.region_success[i] ? 1 : 0;
  }
  r.recoveries = m.recoveries;
  r.scaling = m.scaling;
  r.parallelism_series = m.parallelism_series;

  r.conservation = rt.Accounting();
  r.records_dropped = r.conservation.dropped_loss + r.conservation.fenced;
  r.duplicates = m.duplicates;
  r.inherent_misses = m.inherent_misses;
  r.terminations = m.terminations;
  r.leader_changes = m.leader_changes;
  r.source_records = m.source_records;
  r.output_ledger = rt.FinalLedger();
  if (opts.input_ledger) {
    for (int i = 0; i < rt.source_count(); ++i) {
      const auto& log = rt.source_log(i);
      std::int64_t n = std::min(rt.source_next_offset(i), log.size());
      for (std::int64_t o = 0; o < n; ++o) {
        if (log.Present(o)) ++r.input_ledger[log.KeyOf(o)];
      }
    }
  }
  r.trace_digest = rt.trace_digest();
  r.events = rt.sim().processed();
  r.warnings = m.warnings;
  return r;
}

nlohmann::json CheckpointLogLine(const runtime::CheckpointLogEntry& e) {
  nlohmann::json regions = nlohmann::json::array();
  for (std::size_t i = 0; i < e.region_success.size(); ++i) {
    regions.push_back({{"id", i}, {"status", e.region_success[i] ? "success" : "failed"}});
  }
  nlohmann::json j{{"id", e.id},
                   {"mode", e.mode},
                   {"outcome", e.success ? "success" : "failed"},
                   {"per_region", regions},
                   {"duration_ns", e.duration},
                   {"trigger_ns", e.trigger_time}};
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

nlohmann::json RecoveryLogLine(const runtime::RecoveryLogEntry& e) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : e.tasks) tasks.push_back({t.op, t.subtask});
  return {{"time", e.time},
          {"scope", e.scope},
          {"strategy", e.strategy},
          {"tasks", tasks},
          {"recovery_time_ns", e.recovery_time},
          {"dropped", e.dropped},
          {"replayed", e.replayed}};
}

nlohmann::json ScaleLogLine(const runtime::ScaleLogEntry& e) {
  return {{"time", e.time}, {"outcome", e.outcome}, {"reason", e.reason},
          {"before", e.before}, {"target", e.target}, {"after", e.after}};
}

nlohmann::json SummaryJson(const MetricsReport& r) {
  nlohmann::json rec_times = nlohmann::json::array();
  double rec_sum = 0;
  for (const auto& e : r.recoveries) {
    rec_times.push_back(ToSeconds(e.recovery_time));
    rec_sum += ToSeconds(e.recovery_time);
  }
  std::int64_t out_records = 0;
  for (const auto& [k, e] : r.output_ledger) out_records += e.records;
  std::int64_t changes = 0;
  for (const auto& s : r.scaling) {
    if (s.before != s.after) ++changes;
  }
  const auto& c = r.conservation;
  nlohmann::json j;
  j["valid"] = r.valid;
  j["error"] = r.error;
  j["completed"] = r.completed;
  j["terminated"] = r.terminated;
  j["end_time_s"] = ToSeconds(r.end_time);
  j["qps"] = {{"mean", r.qps_mean}, {"min", r.qps_min}, {"min_10s", r.qps_min_10s}};
  j["latency_ms"] = {{"p50", Ms(r.latency_p50)},
                     {"p99", Ms(r.latency_p99)},
                     {"p99_outside_recovery", Ms(r.latency_p99_outside_recovery)}};
  j["checkpoint"] = {{"attempts", r.checkpoint_attempts},
                     {"successes", r.checkpoint_successes},
                     {"success_pct", r.checkpoint_success_pct()},
                     {"region_successes", r.region_successes}};
  j["recovery"] = {{"events", r.recoveries.size()},
                   {"max_recovery_time_s", ToSeconds(r.max_recovery_time())},
                   {"mean_recovery_time_s", r.recoveries.empty() ? 0.0 : rec_sum / r.recoveries.size()},
                   {"times_s", rec_times}};
  j["records"] = {{"source", r.source_records},
                  {"dropped", r.records_dropped},
                  {"duplicates", r.duplicates},
                  {"inherent_misses", r.inherent_misses},
                  {"output_records", out_records},
                  {"output_keys", r.output_ledger.size()},
                  {"ledger_digest", Hex(LedgerDigest(r.output_ledger))},
                  {"emitted", c.emitted},
                  {"consumed", c.consumed},
                  {"in_flight", c.in_flight},
                  {"rolled_back", c.rolled_back},
                  {"fenced", c.fenced},
                  {"balanced", c.Balanced()}};
  j["scaling"] = {{"events", r.scaling.size()},
                  {"changes", changes},
                  {"final_parallelism", r.parallelism_series.empty() ? nlohmann::json::array()
                                                                       : nlohmann::json(r.parallelism_series.back())}};
  j["control"] = {{"terminations", r.terminations}, {"leader_changes", r.leader_changes}};
  j["trace_digest"] = Hex(r.trace_digest);
  j["events"] = r.events;
  j["warnings"] = r.warnings;
  return j;
}

void WriteReport(const MetricsReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  fs::path d(dir);
  WriteFile(d / "summary.json", SummaryJson(r).dump(2) + "\n");

  std::string lines, csv = "t_s,qps,output,backlog,p99_ms\n";
  std::size_t n = std::max({r.qps.size(), r.output.size(), r.backlog.size(), r.p99_series.size()});
  auto at = [](const auto& v, std::size_t i) { return i < v.size() ? v[i] : 0; };
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::json row{{"t_s", i},
                       {"qps", at(r.qps, i)},
                       {"output", at(r.output, i)},
                       {"backlog", at(r.backlog, i)},
                       {"p99_ms", Ms(at(r.p99_series, i))}};
    lines += row.dump() + "\n";
    csv += std::to_string(i) + "," + std::to_string(at(r.qps, i)) + "," + std::to_string(at(r.output, i)) + "," +
           std::to_string(at(r.backlog, i)) + "," + nlohmann::json(Ms(at(r.p99_series, i))).dump() + "\n";
  }
  WriteFile(d / "metrics.jsonl", lines);
  WriteFile(d / "series.csv", csv);

  std::string ck;
  for (const auto& e : r.checkpoints) ck += CheckpointLogLine(e).dump() + "\n";
  WriteFile(d / "checkpoints.jsonl", ck);
  std::string rc;
  for (const auto& e : r.recoveries) rc += RecoveryLogLine(e).dump() + "\n";
  WriteFile(d / "recovery.jsonl", rc);
  std::string sc;
  for (const auto& e : r.scaling) sc += ScaleLogLine(e).dump() + "\n";
  WriteFile(d / "scaling.jsonl", sc);

  nlohmann::json ledger;
  ledger["output"] = nlohmann::json::object();
  for (const auto& [k, e] : r.output_ledger) {
    ledger["output"][std::to_string(k)] = {{"records", e.records}, {"value_sum", e.value_sum}};
  }
  ledger["input"] = nlohmann::json::object();
  for (const auto& [k, v] : r.input_ledger) ledger["input"][std::to_string(k)] = v;
  WriteFile(d / "ledger.json", ledger.dump() + "\n");
}

}  // namespace streamlab::bench
