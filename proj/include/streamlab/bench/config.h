#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "streamlab/bench/slo.h"
#include "streamlab/bench/workload.h"
#include "streamlab/chaos/fault_plan.h"
#include "streamlab/graph/graph.h"
#include "streamlab/runtime/job_runtime.h"

namespace streamlab::bench {

// Parsed run configuration. `doc` is the fully resolved document: defaults
// filled in, the fault plan and job graph inlined, so it reproduces the run
// on its own.
struct RunConfig {
  nlohmann::json doc;
  std::uint64_t seed = 0;
  WorkloadSpec workload;
  graph::LogicalGraph graph;
  runtime::EngineConfig engine;
  chaos::FaultPlan faults;
  std::optional<SloTarget> slo;
  SimTime max_time = 0;
  std::string out;
  std::string name;
};

// Sets a dot-separated path, creating objects on the way. The value text is
// parsed as JSON when it parses, else taken as a string.
void SetPath(nlohmann::json& doc, const std::string& path, const std::string& value_text);
void SetPathJson(nlohmann::json& doc, const std::string& path, const nlohmann::json& value);
// "key=value" -> (key, value); throws ConfigError without '='.
std::pair<std::string, std::string> SplitOverride(const std::string& kv);

nlohmann::json LoadJsonFile(const std::string& path);

// Relative file references inside the config resolve against base_dir.
RunConfig ResolveConfig(const nlohmann::json& doc, const std::string& base_dir = ".");
RunConfig LoadRunConfig(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace streamlab::bench
