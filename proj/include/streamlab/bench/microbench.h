#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace streamlab::bench {

// Wall-clock micro benchmarks of the hot paths. Unlike simulated runs these
// numbers depend on the host.
struct MicroResult {
  std::string name;
  std::string param;
  std::int64_t ops = 0;  // per repetition
  std::vector<double> ops_per_sec;
  double mean = 0;
  double cv = 0;  // stddev / mean
};

struct MicroOptions {
  int reps = 5;
  double scale = 1.0;  // multiplies per-rep operation counts
  std::vector<std::uint64_t> key_spaces{1'000, 10'000, 100'000, 1'000'000};
  std::uint64_t seed = 1;
};

std::vector<MicroResult> RunMicrobench(const MicroOptions& opts);
nlohmann::json MicroToJson(const std::vector<MicroResult>& results, const MicroOptions& opts);
std::string MicroTable(const std::vector<MicroResult>& results);

}  // namespace streamlab::bench
