#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "streamlab/shuffle/strategy.h"

namespace streamlab::shuffle {

std::uint64_t StableHash(std::uint64_t key, std::uint64_t salt, std::uint64_t seed = 0);

// Routing state owned by one producer subtask for one outgoing edge.
struct RouteContext {
  int producer = 0;
  int up = 1;
  int down = 1;
  // Indexed by downstream subtask; only read by the adaptive strategies.
  std::vector<int> backlog;
  std::vector<double> load;
  std::uint64_t counter = 0;
  std::uint64_t seed = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> key_counters;
};

// Downstream subtasks reachable from `producer`, in ascending order.
std::vector<int> Candidates(const ShuffleStrategy& s, int producer, int up, int down);

// Group index of subtask i out of n split into g contiguous groups.
int GroupOf(int i, int n, int groups);

int RouteStatic(const ShuffleStrategy& s, RouteContext& ctx, std::optional<std::uint64_t> key = {});
int RouteBacklogAware(RouteContext& ctx, int threshold);
int RouteWeakHash(std::uint64_t key, RouteContext& ctx, int k, Dispatch dispatch);
std::vector<int> WeakHashCandidates(std::uint64_t key, int k, int n, std::uint64_t seed = 0);

// Dispatches on the strategy kind.
int Route(const ShuffleStrategy& s, RouteContext& ctx, std::uint64_t key);

// EWMA of a consumer busy fraction.
class LoadEstimate {
 public:
  explicit LoadEstimate(double alpha = kDefaultLoadAlpha) : alpha_(alpha) {}
  void Observe(double busy_fraction) {
    value_ = primed_ ? alpha_ * busy_fraction + (1 - alpha_) * value_ : busy_fraction;
    primed_ = true;
  }
  double value() const { return value_; }

 private:
  double alpha_;
  double value_ = 0;
  bool primed_ = false;
};

}  // namespace streamlab::shuffle
