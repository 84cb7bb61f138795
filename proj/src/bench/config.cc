#include "streamlab/bench/config.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "streamlab/common/duration.h"
#include "streamlab/graph/job_file.h"

namespace streamlab::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

SimTime Secs(const json& v) {
  if (v.is_string()) return ParseDuration(v.get<std::string>());
  return static_cast<SimTime>(std::llround(v.get<double>() * kSecond));
}

SimTime Millis(const json& v) { return static_cast<SimTime>(std::llround(v.get<double>() * kMillisecond)); }

const json& Section(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  const json& s = doc[key];
  if (!s.is_object()) throw ConfigError(std::string(key) + ": expected an object");
  return s;
}

std::string Resolve(const std::string& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return p;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

void SetPathJson(json& doc, const std::string& path, const json& value) {
  if (path.empty()) throw ConfigError("empty override key");
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = path.find('.', start);
    std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("bad override key '" + path + "'");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override '" + path + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

void SetPath(json& doc, const std::string& path, const std::string& value_text) {
  json v = json::parse(value_text, nullptr, false);
  if (v.is_discarded()) v = value_text;
  SetPathJson(doc, path, v);
}

std::pair<std::string, std::string> SplitOverride(const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not key=value");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunConfig ResolveConfig(const json& input, const std::string& base_dir) {
  if (!input.is_object()) throw ConfigError("config: top level must be an object");
  json doc = input;
  // Short aliases used in sweep grids.
  if (doc.contains("shuffle")) {
    SetPathJson(doc, "workload.shuffle", doc["shuffle"]);
    doc.erase("shuffle");
  }
  if (doc.contains("tms")) {
    SetPathJson(doc, "cluster.tms", doc["tms"]);
    doc.erase("tms");
  }

  RunConfig rc;
  try {
    if (!doc.contains("seed")) throw ConfigError("seed: required");
    rc.seed = doc["seed"].get<std::uint64_t>();
    rc.name = doc.value("name", std::string("run"));
    rc.out = doc.value("out", std::string());

    const json& cl = Section(doc, "cluster");
    runtime::EngineConfig& e = rc.engine;
    e.cluster = control::ClusterModelFromJson(cl);
    e.slots_per_tm = e.cluster.slots_per_tm;

    json wl = Section(doc, "workload");
    if (!wl.contains("parallelism")) wl["parallelism"] = e.cluster.tms;
    rc.workload = WorkloadFromJson(wl);
    BuiltWorkload built = BuildWorkload(rc.workload);
    rc.graph = built.graph;
    e.sources = built.sources;
    e.window_size = rc.workload.window;
    e.join_timeout = rc.workload.join_timeout;
    if (doc.contains("job")) {
      const json& job = doc["job"];
      rc.graph = job.is_string() ? graph::LoadJobFile(Resolve(base_dir, job.get<std::string>()))
                                 : graph::LogicalGraphFromJson(job);
      rc.graph.Validate();
    }

    e.seed = rc.seed;
    const json& en = Section(doc, "engine");
    e.channel_capacity = en.value("channel_capacity", e.channel_capacity);
    if (en.contains("default_service_us")) {
      e.default_service = static_cast<SimTime>(std::llround(en["default_service_us"].get<double>() * kMicrosecond));
    }
    e.service_jitter = en.value("service_jitter", e.service_jitter);
    if (en.contains("detection_ms")) e.detection_latency = Millis(en["detection_ms"]);
    if (en.contains("watermark_interval_s")) e.watermark_interval = Secs(en["watermark_interval_s"]);
    if (en.contains("leader_check_s")) e.leader_check_interval = Secs(en["leader_check_s"]);
    if (en.contains("jm_failover_s")) e.jm_failover = Secs(en["jm_failover_s"]);
    if (e.service_jitter < 0 || e.service_jitter >= 1) throw ConfigError("engine.service_jitter must be in [0,1)");

    const json& ck = Section(doc, "checkpoint");
    e.checkpointing = ck.value("enabled", e.checkpointing);
    if (ck.contains("mode")) e.checkpoint_mode = checkpoint::ParseMode(ck["mode"].get<std::string>());
    if (ck.contains("interval_s")) e.checkpoint_interval = Secs(ck["interval_s"]);
    if (ck.contains("deadline_s")) e.checkpoint_deadline = Secs(ck["deadline_s"]);
    if (e.checkpoint_deadline <= 0) e.checkpoint_deadline = e.checkpoint_interval;
    e.incremental = ck.value("incremental", e.incremental);
    e.full_every = ck.value("full_every", e.full_every);
    e.bytes_per_key = ck.value("bytes_per_key", e.bytes_per_key);
    e.base_state_bytes = ck.value("base_state_bytes", e.base_state_bytes);
    if (ck.contains("restore")) {
      std::string m = ck["restore"].get<std::string>();
      if (m == "eager") {
        e.restore_mode = checkpoint::RestoreMode::Eager;
      } else if (m == "lazy") {
        e.restore_mode = checkpoint::RestoreMode::Lazy;
      } else {
        throw ConfigError("checkpoint.restore must be eager or lazy");
      }
    }
    e.p_slow = ck.value("p_slow", e.p_slow);
    if (ck.contains("slow_delay_s")) e.slow_delay = Secs(ck["slow_delay_s"]);
    if (ck.contains("store")) {
      const json& st = ck["store"];
      if (st.contains("put_base_ms")) e.store.put_base = Millis(st["put_base_ms"]);
      e.store.put_ns_per_byte = st.value("put_ns_per_byte", e.store.put_ns_per_byte);
      if (st.contains("get_base_ms")) e.store.get_base = Millis(st["get_base_ms"]);
      e.store.get_ns_per_byte = st.value("get_ns_per_byte", e.store.get_ns_per_byte);
    }
    if (e.checkpoint_interval <= 0) throw ConfigError("checkpoint.interval_s must be > 0");
    if (e.p_slow < 0 || e.p_slow > 1) throw ConfigError("checkpoint.p_slow must be in [0,1]");

    const json& rv = Section(doc, "recovery");
    if (rv.contains("strategy")) e.recovery = recovery::ParseStrategy(rv["strategy"].get<std::string>());
    if (rv.contains("completeness")) e.completeness = recovery::ParseCompleteness(rv["completeness"].get<std::string>());
    if (rv.contains("replication")) e.replication.mode = recovery::ParseReplication(rv["replication"].get<std::string>());
    e.replication.standby_lag_records = rv.value("standby_lag_records", e.replication.standby_lag_records);
    if (rv.contains("tm_replace_delay_s")) e.tm_replace_delay = Secs(rv["tm_replace_delay_s"]);
    if (rv.contains("restore_retry_s")) e.restore_retry = Secs(rv["restore_retry_s"]);
    if (e.recovery == recovery::RecoveryStrategy::SingleTask && e.completeness == recovery::Completeness::Full) {
      throw ConfigError("recovery: single_task requires completeness = partial");
    }

    e.autoscale = autoscale::AutoscaleConfigFromJson(Section(doc, "autoscale"));

    if (doc.contains("faults")) {
      const json& f = doc["faults"];
      rc.faults = f.is_string() ? chaos::LoadPlanFile(Resolve(base_dir, f.get<std::string>())) : chaos::LoadPlan(f);
    }
    if (doc.contains("slo") && !doc["slo"].is_null()) rc.slo = SloFromJson(doc["slo"]);

    const json& run = Section(doc, "run");
    rc.max_time = run.contains("max_time_s") ? Secs(run["max_time_s"]) : rc.workload.duration + 10 * kMinute;
    if (rc.max_time <= 0) throw ConfigError("run.max_time_s must be > 0");
  } catch (const PlanError& err) {
    throw ConfigError("faults " + std::string(err.what()));
  } catch (const GraphError& err) {
    throw ConfigError(std::string("job: ") + err.what());
  } catch (const json::exception& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }

  // Fully resolved snapshot.
  const auto& e = rc.engine;
  json r;
  r["name"] = rc.name;
  r["seed"] = rc.seed;
  if (!rc.out.empty()) r["out"] = rc.out;
  r["workload"] = WorkloadToJson(rc.workload);
  if (doc.contains("job")) r["job"] = graph::LogicalGraphToJson(rc.graph);
  r["cluster"] = control::ClusterModelToJson(e.cluster);
  r["engine"] = {{"channel_capacity", e.channel_capacity},
                 {"default_service_us", static_cast<double>(e.default_service) / kMicrosecond},
                 {"service_jitter", e.service_jitter},
                 {"detection_ms", ToMillis(e.detection_latency)},
                 {"watermark_interval_s", ToSeconds(e.watermark_interval)},
                 {"leader_check_s", ToSeconds(e.leader_check_interval)},
                 {"jm_failover_s", ToSeconds(e.jm_failover)}};
  r["checkpoint"] = {{"enabled", e.checkpointing},
                     {"mode", checkpoint::ModeName(e.checkpoint_mode)},
                     {"interval_s", ToSeconds(e.checkpoint_interval)},
                     {"deadline_s", ToSeconds(e.checkpoint_deadline)},
                     {"incremental", e.incremental},
                     {"full_every", e.full_every},
                     {"bytes_per_key", e.bytes_per_key},
                     {"base_state_bytes", e.base_state_bytes},
                     {"restore", e.restore_mode == checkpoint::RestoreMode::Lazy ? "lazy" : "eager"},
                     {"p_slow", e.p_slow},
                     {"slow_delay_s", ToSeconds(e.slow_delay)},
                     {"store",
                      {{"put_base_ms", ToMillis(e.store.put_base)},
                       {"put_ns_per_byte", e.store.put_ns_per_byte},
                       {"get_base_ms", ToMillis(e.store.get_base)},
                       {"get_ns_per_byte", e.store.get_ns_per_byte}}}};
  r["recovery"] = {{"strategy", recovery::StrategyName(e.recovery)},
                   {"completeness", recovery::CompletenessName(e.completeness)},
                   {"replication", recovery::ReplicationName(e.replication.mode)},
                   {"standby_lag_records", e.replication.standby_lag_records},
                   {"tm_replace_delay_s", ToSeconds(e.tm_replace_delay)},
                   {"restore_retry_s", ToSeconds(e.restore_retry)}};
  r["autoscale"] = autoscale::AutoscaleConfigToJson(e.autoscale);
  r["faults"] = chaos::PlanToJson(rc.faults);
  if (rc.slo) r["slo"] = SloToJson(*rc.slo);
  r["run"] = {{"max_time_s", ToSeconds(rc.max_time)}};
  rc.doc = std::move(r);
  return rc;
}

RunConfig LoadRunConfig(const std::string& path, const std::vector<std::string>& overrides) {
  json doc = LoadJsonFile(path);
  for (const auto& kv : overrides) {
    auto [k, v] = SplitOverride(kv);
    SetPath(doc, k, v);
  }
  std::string base = fs::path(path).parent_path().string();
  return ResolveConfig(doc, base.empty() ? "." : base);
}

}  // namespace streamlab::bench
