#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace streamlab::shuffle {

enum class StrategyKind { Forward, KeyHash, Rebalance, Rescale, GroupRescale, BacklogAware, WeakHash };

enum class Dispatch { LeastLoaded, RoundRobin };

inline constexpr int kDefaultBacklogThreshold = 16;
inline constexpr double kDefaultLoadAlpha = 0.2;

struct ShuffleStrategy {
  StrategyKind kind = StrategyKind::Rebalance;
  int groups = 1;
  int threshold = kDefaultBacklogThreshold;
  int k = 2;
  Dispatch dispatch = Dispatch::LeastLoaded;

  static ShuffleStrategy Forward() { return {StrategyKind::Forward}; }
  static ShuffleStrategy KeyHash() { return {StrategyKind::KeyHash}; }
  static ShuffleStrategy Rebalance() { return {StrategyKind::Rebalance}; }
  static ShuffleStrategy Rescale() { return {StrategyKind::Rescale}; }
  static ShuffleStrategy GroupRescale(int groups) {
    ShuffleStrategy s{StrategyKind::GroupRescale};
    s.groups = groups;
    return s;
  }
  static ShuffleStrategy BacklogAware(int threshold = kDefaultBacklogThreshold) {
    ShuffleStrategy s{StrategyKind::BacklogAware};
    s.threshold = threshold;
    return s;
  }
  static ShuffleStrategy WeakHash(int k, Dispatch d = Dispatch::LeastLoaded) {
    ShuffleStrategy s{StrategyKind::WeakHash};
    s.k = k;
    s.dispatch = d;
    return s;
  }

  bool keyed() const { return kind == StrategyKind::KeyHash || kind == StrategyKind::WeakHash; }
  bool all_to_all() const {
    return kind == StrategyKind::KeyHash || kind == StrategyKind::Rebalance ||
           kind == StrategyKind::BacklogAware || kind == StrategyKind::WeakHash;
  }

  // Canonical text form including the parameters that affect routing.
  std::string Describe() const;

  bool operator==(const ShuffleStrategy& o) const { return Describe() == o.Describe(); }
};

std::string StrategyName(StrategyKind kind);

// Accepts forward, keyhash, rebalance, rescale, group_rescale, backlog,
// weakhash (plus a few aliases). Params follow the job file edge schema.
ShuffleStrategy ParseStrategy(const std::string& name, const nlohmann::json& params = {});

nlohmann::json StrategyParams(const ShuffleStrategy& s);

}  // namespace streamlab::shuffle
