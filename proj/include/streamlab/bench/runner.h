#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamlab/bench/config.h"
#include "streamlab/bench/metrics.h"
#include "streamlab/bench/slo.h"

namespace streamlab::bench {

enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitConfig = 2, kExitEngine = 3 };

struct RunOutcome {
  MetricsReport report;
  std::optional<SloVerdict> verdict;
  int exit_code = kExitOk;
};

// Builds the runtime, starts it and arms the fault plan. Run() is this plus
// RunToCompletion and Collect; tests use it to reach into the engine.
std::unique_ptr<runtime::JobRuntime> Prepare(const RunConfig& cfg, std::vector<std::string>* warnings = nullptr);
CollectOptions DefaultCollect(const RunConfig& cfg);

// Runs one configuration to completion. Engine failures come back as an
// invalid report rather than an exception.
MetricsReport Run(const RunConfig& cfg);

// Run + verdict; writes the report files, resolved_config.json and
// verdict.json (when an SLO is configured) into dir unless dir is empty.
RunOutcome RunAndWrite(const RunConfig& cfg, const std::string& dir);

struct GridAxis {
  std::string path;
  std::vector<nlohmann::json> values;
};

// "a.b=[1,2]" or "a.b=1,2,3"; values parse as JSON when they can.
GridAxis ParseGridFlag(const std::string& text);
// A config "grid" object: {"path": [values..]}.
std::vector<GridAxis> GridFromJson(const nlohmann::json& j);

struct SweepCell {
  std::string label;  // "path=value,..." in axis order
  nlohmann::json doc;
};
std::vector<SweepCell> ExpandGrid(const nlohmann::json& base, const std::vector<GridAxis>& axes);

struct SweepOptions {
  std::string out_dir;
  int parallel = 1;
  std::string base_dir = ".";
};

// Runs every cell (config errors and crashes are recorded per cell), writes
// cell directories, summary.csv and summary.txt. Returns 1 when any cell
// crashed or failed to configure, else 0.
int RunSweep(const nlohmann::json& base, const std::vector<GridAxis>& axes, const SweepOptions& opts,
             std::ostream& log);

}  // namespace streamlab::bench
