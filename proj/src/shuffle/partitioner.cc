#include "streamlab/shuffle/partitioner.h"

#include <algorithm>

#include "streamlab/common/random.h"
#include "streamlab/common/types.h"

namespace streamlab::shuffle {

std::string StrategyName(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Forward: return "forward";
    case StrategyKind::KeyHash: return "keyhash";
    case StrategyKind::Rebalance: return "rebalance";
    case StrategyKind::Rescale: return "rescale";
    case StrategyKind::GroupRescale: return "group_rescale";
    case StrategyKind::BacklogAware: return "backlog";
    case StrategyKind::WeakHash: return "weakhash";
  }
  return "?";
}

std::string ShuffleStrategy::Describe() const {
  std::string out = StrategyName(kind);
  switch (kind) {
    case StrategyKind::GroupRescale:
      out += "(groups=" + std::to_string(groups) + ")";
      break;
    case StrategyKind::BacklogAware:
      out += "(threshold=" + std::to_string(threshold) + ")";
      break;
    case StrategyKind::WeakHash:
      out += "(k=" + std::to_string(k) +
             (dispatch == Dispatch::LeastLoaded ? ",least_loaded)" : ",round_robin)");
      break;
    default:
      break;
  }
  return out;
}

ShuffleStrategy ParseStrategy(const std::string& name, const nlohmann::json& params) {
  auto get_int = [&](const char* field, int dflt) {
    if (params.is_object() && params.contains(field)) return params.at(field).get<int>();
    return dflt;
  };
  ShuffleStrategy s;
  if (name == "forward") {
    s = ShuffleStrategy::Forward();
  } else if (name == "keyhash" || name == "hash" || name == "key_hash") {
    s = ShuffleStrategy::KeyHash();
  } else if (name == "rebalance" || name == "round_robin") {
    s = ShuffleStrategy::Rebalance();
  } else if (name == "rescale") {
    s = ShuffleStrategy::Rescale();
  } else if (name == "group_rescale" || name == "grouprescale") {
    s = ShuffleStrategy::GroupRescale(get_int("groups", 1));
    if (s.groups < 1) throw ConfigError("group_rescale groups must be >= 1");
  } else if (name == "backlog" || name == "backlog_aware") {
    s = ShuffleStrategy::BacklogAware(get_int("threshold", kDefaultBacklogThreshold));
    if (s.threshold <= 0) throw ConfigError("backlog threshold must be > 0");
  } else if (name == "weakhash" || name == "weak_hash") {
    Dispatch d = Dispatch::LeastLoaded;
    if (params.is_object() && params.contains("dispatch")) {
      auto text = params.at("dispatch").get<std::string>();
      if (text == "least_loaded") {
        d = Dispatch::LeastLoaded;
      } else if (text == "round_robin") {
        d = Dispatch::RoundRobin;
      } else {
        throw ConfigError("unknown weakhash dispatch '" + text + "'");
      }
    }
    s = ShuffleStrategy::WeakHash(get_int("k", 2), d);
    if (s.k < 1) throw ConfigError("weakhash k must be >= 1");
  } else {
    throw ConfigError("unknown shuffle strategy '" + name + "'");
  }
  return s;
}

nlohmann::json StrategyParams(const ShuffleStrategy& s) {
  nlohmann::json p = nlohmann::json::object();
  switch (s.kind) {
    case StrategyKind::GroupRescale: p["groups"] = s.groups; break;
    case StrategyKind::BacklogAware: p["threshold"] = s.threshold; break;
    case StrategyKind::WeakHash:
      p["k"] = s.k;
      p["dispatch"] = s.dispatch == Dispatch::LeastLoaded ? "least_loaded" : "round_robin";
      break;
    default: break;
  }
  return p;
}

std::uint64_t StableHash(std::uint64_t key, std::uint64_t salt, std::uint64_t seed) {
  return Mix64(key ^ Mix64(salt * 0x9e3779b97f4a7c15ULL + seed + 0x51ed27ULL));
}

int GroupOf(int i, int n, int groups) {
  int size = std::max(1, n / groups);
  return std::min(i / size, groups - 1);
}

namespace {

std::pair<int, int> GroupRange(int g, int n, int groups) {
  int size = std::max(1, n / groups);
  int lo = g * size;
  int hi = g == groups - 1 ? n : lo + size;
  return {lo, hi};
}

}  // namespace

std::vector<int> Candidates(const ShuffleStrategy& s, int producer, int up, int down) {
  std::vector<int> out;
  switch (s.kind) {
    case StrategyKind::Forward:
      if (up != down) throw ConfigError("forward edge requires equal parallelism");
      out.push_back(producer);
      break;
    case StrategyKind::Rescale:
      if (up < down) {
        int lo = static_cast<int>(static_cast<long long>(producer) * down / up);
        int hi = static_cast<int>(static_cast<long long>(producer + 1) * down / up);
        for (int j = lo; j < hi; ++j) out.push_back(j);
      } else {
        out.push_back(static_cast<int>(static_cast<long long>(producer) * down / up));
      }
      break;
    case StrategyKind::GroupRescale: {
      if (s.groups < 1 || s.groups > std::min(up, down)) {
        throw ConfigError("group_rescale groups must be in [1, min(up, down)]");
      }
      auto [lo, hi] = GroupRange(GroupOf(producer, up, s.groups), down, s.groups);
      for (int j = lo; j < hi; ++j) out.push_back(j);
      break;
    }
    default:
      for (int j = 0; j < down; ++j) out.push_back(j);
      break;
  }
  return out;
}

int RouteStatic(const ShuffleStrategy& s, RouteContext& ctx, std::optional<std::uint64_t> key) {
  switch (s.kind) {
    case StrategyKind::Forward:
      if (ctx.up != ctx.down) throw ConfigError("forward edge requires equal parallelism");
      return ctx.producer;
    case StrategyKind::KeyHash:
      if (!key) throw ConfigError("keyhash routing needs a key");
      return static_cast<int>(StableHash(*key, 0, ctx.seed) % static_cast<std::uint64_t>(ctx.down));
    case StrategyKind::Rebalance:
      return static_cast<int>(ctx.counter++ % static_cast<std::uint64_t>(ctx.down));
    case StrategyKind::Rescale:
    case StrategyKind::GroupRescale: {
      auto range = Candidates(s, ctx.producer, ctx.up, ctx.down);
      return range[ctx.counter++ % range.size()];
    }
    case StrategyKind::BacklogAware:
      return RouteBacklogAware(ctx, s.threshold);
    case StrategyKind::WeakHash:
      if (!key) throw ConfigError("weakhash routing needs a key");
      return RouteWeakHash(*key, ctx, s.k, s.dispatch);
  }
  return 0;
}

int RouteBacklogAware(RouteContext& ctx, int threshold) {
  int n = ctx.down;
  int start = static_cast<int>(ctx.counter % static_cast<std::uint64_t>(n));
  for (int step = 0; step < n; ++step) {
    int j = (start + step) % n;
    int b = j < static_cast<int>(ctx.backlog.size()) ? ctx.backlog[j] : 0;
    if (b < threshold) {
      ctx.counter = static_cast<std::uint64_t>(j) + 1;
      return j;
    }
  }
  int best = 0;
  for (int j = 1; j < n; ++j) {
    if (ctx.backlog[j] < ctx.backlog[best]) best = j;
  }
  return best;
}

std::vector<int> WeakHashCandidates(std::uint64_t key, int k, int n, std::uint64_t seed) {
  std::vector<int> out;
  for (int i = 0; i < k; ++i) {
    int c = static_cast<int>(StableHash(key, static_cast<std::uint64_t>(i), seed) %
                             static_cast<std::uint64_t>(n));
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

int RouteWeakHash(std::uint64_t key, RouteContext& ctx, int k, Dispatch dispatch) {
  auto cands = WeakHashCandidates(key, k, ctx.down, ctx.seed);
  if (dispatch == Dispatch::RoundRobin) {
    auto& c = ctx.key_counters[key];
    return cands[c++ % cands.size()];
  }
  int best = -1;
  double best_load = 0;
  for (int c : cands) {
    double l = c < static_cast<int>(ctx.load.size()) ? ctx.load[c] : 0.0;
    if (best < 0 || l < best_load || (l == best_load && c < best)) {
      best = c;
      best_load = l;
    }
  }
  return best;
}

int Route(const ShuffleStrategy& s, RouteContext& ctx, std::uint64_t key) {
  return RouteStatic(s, ctx, key);
}

}  // namespace streamlab::shuffle
