#include "streamlab/bench/workload.h"

#include <cmath>

#include "streamlab/common/random.h"

namespace streamlab::bench {

namespace {

SimTime Seconds(const nlohmann::json& v) {
  return static_cast<SimTime>(std::llround(v.get<double>() * kSecond));
}

SimTime Micros(const nlohmann::json& v) {
  return static_cast<SimTime>(std::llround(v.get<double>() * kMicrosecond));
}

}  // namespace

std::string WorkloadName(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::Q2Filter: return "q2";
    case WorkloadKind::Q12WindowCount: return "q12";
    case WorkloadKind::DataSync: return "ds";
    case WorkloadKind::SampleStitch: return "ss";
  }
  return "?";
}

WorkloadKind ParseWorkload(const std::string& name) {
  if (name == "q2" || name == "q2_filter") return WorkloadKind::Q2Filter;
  if (name == "q12" || name == "q12_window_count") return WorkloadKind::Q12WindowCount;
  if (name == "ds" || name == "data_sync") return WorkloadKind::DataSync;
  if (name == "ss" || name == "sample_stitch") return WorkloadKind::SampleStitch;
  throw ConfigError("unknown workload kind '" + name + "'");
}

void WorkloadSpec::Validate() const {
  if (parallelism < 1 || source_parallelism < 0) throw ConfigError("workload.parallelism must be >= 1");
  if (rate.empty()) throw ConfigError("workload.rate is empty");
  for (std::size_t i = 0; i < rate.size(); ++i) {
    if (!(rate[i].rate > 0)) throw ConfigError("workload.rate[" + std::to_string(i) + "] must be > 0");
    if (i > 0 && rate[i].start <= rate[i - 1].start) throw ConfigError("workload.rate steps must increase in time");
  }
  if (rate.front().start != 0) throw ConfigError("workload.rate must start at t=0");
  if (duration <= 0) throw ConfigError("workload.duration_s must be > 0");
  if (zipf_s < 0) throw ConfigError("workload.zipf_s must be >= 0");
  if (key_space < 1) throw ConfigError("workload.key_space must be >= 1");
  if (selectivity < 0 || selectivity > 1) throw ConfigError("workload.selectivity must be in [0,1]");
  if (window <= 0) throw ConfigError("workload.window_s must be > 0");
  if (missing_fraction < 0 || missing_fraction >= 1) throw ConfigError("workload.missing_fraction must be in [0,1)");
  if (join_timeout <= 0) throw ConfigError("workload.join_timeout_s must be > 0");
}

WorkloadSpec WorkloadFromJson(const nlohmann::json& j) {
  WorkloadSpec w;
  if (j.is_null()) return w;
  if (!j.is_object()) throw ConfigError("workload must be an object");
  try {
    if (j.contains("kind")) w.kind = ParseWorkload(j["kind"].get<std::string>());
    w.parallelism = j.value("parallelism", w.parallelism);
    w.source_parallelism = j.value("source_parallelism", w.source_parallelism);
    if (j.contains("rate")) {
      const auto& r = j["rate"];
      w.rate.clear();
      if (r.is_number()) {
        w.rate.push_back({0, r.get<double>()});
      } else if (r.is_array()) {
        for (const auto& step : r) w.rate.push_back({Seconds(step.at(0)), step.at(1).get<double>()});
      } else {
        throw ConfigError("workload.rate must be a number or a list of [t_s, rate] steps");
      }
    }
    if (j.contains("trace")) {
      w.rate.clear();
      SimTime t = 0;
      for (const auto& r : j["trace"]) {
        w.rate.push_back({t, r.get<double>()});
        t += kSecond;
      }
    }
    if (j.contains("duration_s")) w.duration = Seconds(j["duration_s"]);
    w.zipf_s = j.value("zipf_s", w.zipf_s);
    w.key_space = j.value("key_space", w.key_space);
    w.selectivity = j.value("selectivity", w.selectivity);
    if (j.contains("window_s")) w.window = Seconds(j["window_s"]);
    if (j.contains("stitch_delay_s")) w.stitch_delay = Seconds(j["stitch_delay_s"]);
    w.missing_fraction = j.value("missing_fraction", w.missing_fraction);
    if (j.contains("join_timeout_s")) w.join_timeout = Seconds(j["join_timeout_s"]);
    w.shuffle = j.value("shuffle", w.shuffle);
    if (j.contains("shuffle_params")) w.shuffle_params = j["shuffle_params"];
    if (j.contains("source_us")) w.source_service = Micros(j["source_us"]);
    if (j.contains("op_us")) w.op_service = Micros(j["op_us"]);
    if (j.contains("sink_us")) w.sink_service = Micros(j["sink_us"]);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("workload: ") + e.what());
  }
  w.Validate();
  return w;
}

nlohmann::json WorkloadToJson(const WorkloadSpec& w) {
  nlohmann::json rate = nlohmann::json::array();
  for (const auto& s : w.rate) rate.push_back({ToSeconds(s.start), s.rate});
  return {{"kind", WorkloadName(w.kind)},
          {"parallelism", w.parallelism},
          {"source_parallelism", w.source_parallelism},
          {"rate", rate},
          {"duration_s", ToSeconds(w.duration)},
          {"zipf_s", w.zipf_s},
          {"key_space", w.key_space},
          {"selectivity", w.selectivity},
          {"window_s", ToSeconds(w.window)},
          {"stitch_delay_s", ToSeconds(w.stitch_delay)},
          {"missing_fraction", w.missing_fraction},
          {"join_timeout_s", ToSeconds(w.join_timeout)},
          {"shuffle", w.shuffle},
          {"shuffle_params", w.shuffle_params},
          {"source_us", static_cast<double>(w.source_service) / kMicrosecond},
          {"op_us", static_cast<double>(w.op_service) / kMicrosecond},
          {"sink_us", static_cast<double>(w.sink_service) / kMicrosecond}};
}

namespace {

runtime::SourceProfile BaseProfile(const WorkloadSpec& w) {
  runtime::SourceProfile p;
  p.steps = w.rate;
  p.end = w.duration;
  p.zipf_s = w.zipf_s;
  p.key_space = w.key_space;
  return p;
}

shuffle::ShuffleStrategy EdgeStrategy(const WorkloadSpec& w, const char* fallback) {
  return shuffle::ParseStrategy(w.shuffle.empty() ? fallback : w.shuffle, w.shuffle_params);
}

graph::OperatorSpec Op(std::string id, graph::OperatorKind kind, int p, SimTime service, double sel = 1.0) {
  graph::OperatorSpec s;
  s.id = std::move(id);
  s.kind = kind;
  s.parallelism = p;
  s.selectivity = sel;
  s.service_time = service;
  return s;
}

}  // namespace

BuiltWorkload BuildWorkload(const WorkloadSpec& w) {
  w.Validate();
  using graph::OperatorKind;
  BuiltWorkload b;
  auto& g = b.graph;
  const int p = w.parallelism;
  switch (w.kind) {
    case WorkloadKind::Q2Filter:
      g.Add(Op("source", OperatorKind::Source, w.sources(), w.source_service));
      g.Add(Op("filter", OperatorKind::Filter, p, w.op_service, w.selectivity));
      g.Add(Op("sink", OperatorKind::Sink, p, w.sink_service));
      g.Connect("source", "filter", EdgeStrategy(w, "rebalance"));
      g.Connect("filter", "sink", shuffle::ShuffleStrategy::Forward());
      b.sources.push_back(BaseProfile(w));
      break;
    case WorkloadKind::Q12WindowCount:
      g.Add(Op("source", OperatorKind::Source, w.sources(), w.source_service));
      g.Add(Op("window", OperatorKind::WindowCount, p, w.op_service));
      g.Add(Op("sink", OperatorKind::Sink, p, w.sink_service));
      g.Connect("source", "window", EdgeStrategy(w, "keyhash"));
      g.Connect("window", "sink", shuffle::ShuffleStrategy::Forward());
      b.sources.push_back(BaseProfile(w));
      break;
    case WorkloadKind::DataSync:
      g.Add(Op("source", OperatorKind::Source, w.sources(), w.source_service));
      g.Add(Op("sink", OperatorKind::Sink, p, w.sink_service));
      g.Connect("source", "sink", EdgeStrategy(w, "forward"));
      b.sources.push_back(BaseProfile(w));
      break;
    case WorkloadKind::SampleStitch: {
      g.Add(Op("samples", OperatorKind::Source, w.sources(), w.source_service));
      g.Add(Op("feedback", OperatorKind::Source, w.sources(), w.source_service));
      g.Add(Op("stitch", OperatorKind::Join, p, w.op_service));
      g.Add(Op("sink", OperatorKind::Sink, p, w.sink_service));
      auto s = EdgeStrategy(w, "keyhash");
      g.Connect("samples", "stitch", s);
      g.Connect("feedback", "stitch", s);
      g.Connect("stitch", "sink", shuffle::ShuffleStrategy::Forward());
      runtime::SourceProfile a = BaseProfile(w);
      a.key_mode = runtime::KeyMode::Offset;
      runtime::SourceProfile fb = a;
      fb.side = 1;
      fb.delay = w.stitch_delay;
      fb.missing_fraction = w.missing_fraction;
      b.sources = {a, fb};
      break;
    }
  }
  g.Validate();
  return b;
}

namespace {

std::vector<runtime::SourceProfile> PerSubtaskProfiles(const WorkloadSpec& w) {
  BuiltWorkload b = BuildWorkload(w);
  std::vector<runtime::SourceProfile> out;
  int op_index = 0;
  for (const auto& op : b.graph.operators) {
    if (op.kind != graph::OperatorKind::Source) continue;
    const auto& prof = b.sources[std::min<std::size_t>(op_index, b.sources.size() - 1)];
    for (int s = 0; s < op.parallelism; ++s) {
      runtime::SourceProfile sp = prof;
      if (sp.key_mode == runtime::KeyMode::Offset) sp.key_base += static_cast<std::uint64_t>(s) << 40;
      out.push_back(sp);
    }
    ++op_index;
  }
  return out;
}

}  // namespace

std::int64_t GeneratedCount(const WorkloadSpec& w, SimTime t, std::uint64_t seed) {
  RngStreams streams(seed);
  auto profiles = PerSubtaskProfiles(w);
  std::int64_t n = 0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    runtime::SourceLog log(profiles[i], streams.SubSeed("source", i));
    n += log.CountBy(t);
  }
  return n;
}

std::vector<std::uint64_t> GeneratedKeys(const WorkloadSpec& w, int index, SimTime t, std::uint64_t seed) {
  RngStreams streams(seed);
  auto profiles = PerSubtaskProfiles(w);
  if (index < 0 || index >= static_cast<int>(profiles.size())) throw ConfigError("no such source subtask");
  runtime::SourceLog log(profiles[index], streams.SubSeed("source", static_cast<std::uint64_t>(index)));
  std::vector<std::uint64_t> keys;
  std::int64_t n = log.CountBy(t);
  keys.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) keys.push_back(log.KeyOf(i));
  return keys;
}

}  // namespace streamlab::bench
