#include "streamlab/graph/graph.h"

#include <algorithm>
#include <map>
#include <numeric>

#include "streamlab/shuffle/partitioner.h"

namespace streamlab::graph {

std::string KindName(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Source: return "source";
    case OperatorKind::Filter: return "filter";
    case OperatorKind::WindowCount: return "window_count";
    case OperatorKind::Lookup: return "lookup";
    case OperatorKind::Join: return "join";
    case OperatorKind::Sink: return "sink";
  }
  return "?";
}

OperatorKind ParseKind(const std::string& name) {
  std::string n;
  for (char c : name) {
    if (c != '_') n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (n == "source") return OperatorKind::Source;
  if (n == "filter") return OperatorKind::Filter;
  if (n == "windowcount" || n == "window") return OperatorKind::WindowCount;
  if (n == "lookup") return OperatorKind::Lookup;
  if (n == "join") return OperatorKind::Join;
  if (n == "sink") return OperatorKind::Sink;
  throw GraphError("unknown operator kind '" + name + "'");
}

LogicalGraph& LogicalGraph::Add(OperatorSpec op) {
  operators.push_back(std::move(op));
  return *this;
}

LogicalGraph& LogicalGraph::Connect(const std::string& from, const std::string& to,
                                    shuffle::ShuffleStrategy s) {
  edges.push_back({from, to, s});
  return *this;
}

int LogicalGraph::IndexOf(const std::string& id) const {
  for (std::size_t i = 0; i < operators.size(); ++i) {
    if (operators[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> LogicalGraph::Upstream(int op) const {
  std::vector<int> out;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].to == operators[op].id) out.push_back(static_cast<int>(e));
  }
  return out;
}

std::vector<int> LogicalGraph::Downstream(int op) const {
  std::vector<int> out;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].from == operators[op].id) out.push_back(static_cast<int>(e));
  }
  return out;
}

std::vector<int> LogicalGraph::TopologicalOrder() const {
  int n = static_cast<int>(operators.size());
  std::vector<int> indeg(n, 0);
  for (const auto& e : edges) {
    int to = IndexOf(e.to);
    if (to < 0 || IndexOf(e.from) < 0) throw GraphError("edge references unknown operator");
    ++indeg[to];
  }
  std::vector<int> order;
  std::vector<bool> done(n, false);
  // Kahn's algorithm, lowest index first for a stable order.
  for (int round = 0; round < n; ++round) {
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (!done[i] && indeg[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick < 0) throw GraphError("logical graph has a cycle");
    done[pick] = true;
    order.push_back(pick);
    for (int e : Downstream(pick)) --indeg[IndexOf(edges[e].to)];
  }
  return order;
}

void LogicalGraph::Validate() const {
  if (operators.empty()) throw GraphError("logical graph has no operators");
  for (std::size_t i = 0; i < operators.size(); ++i) {
    const auto& op = operators[i];
    if (op.parallelism < 1) throw GraphError("operator '" + op.id + "' has parallelism < 1");
    if (op.selectivity < 0) throw GraphError("operator '" + op.id + "' has negative selectivity");
    for (std::size_t j = 0; j < i; ++j) {
      if (operators[j].id == op.id) throw GraphError("duplicate operator id '" + op.id + "'");
    }
  }
  for (const auto& e : edges) {
    if (IndexOf(e.from) < 0) throw GraphError("edge from unknown operator '" + e.from + "'");
    if (IndexOf(e.to) < 0) throw GraphError("edge to unknown operator '" + e.to + "'");
    if (operators[IndexOf(e.to)].kind == OperatorKind::Source) {
      throw GraphError("source '" + e.to + "' cannot have inputs");
    }
  }
  TopologicalOrder();
  for (std::size_t i = 0; i < operators.size(); ++i) {
    if (operators[i].kind != OperatorKind::Source && Upstream(static_cast<int>(i)).empty()) {
      throw GraphError("operator '" + operators[i].id + "' has no inbound edge");
    }
  }
}

ExecutionGraph Expand(const LogicalGraph& logical, int slots_per_tm) {
  if (slots_per_tm < 1) throw GraphError("slots_per_tm must be >= 1");
  logical.Validate();
  ExecutionGraph g;
  g.logical = logical;
  g.slots_per_tm = slots_per_tm;
  for (std::size_t op = 0; op < logical.operators.size(); ++op) {
    g.op_offset.push_back(static_cast<int>(g.tasks.size()));
    for (int s = 0; s < logical.operators[op].parallelism; ++s) {
      g.tasks.push_back({static_cast<int>(op), s});
    }
  }
  for (std::size_t t = 0; t < g.tasks.size(); ++t) {
    g.placement.push_back(TmId{static_cast<std::int32_t>(t / slots_per_tm)});
  }
  g.num_tms = static_cast<int>((g.tasks.size() + slots_per_tm - 1) / slots_per_tm);

  std::map<std::string, int> scheme_index;
  for (std::size_t e = 0; e < logical.edges.size(); ++e) {
    const auto& edge = logical.edges[e];
    int from = logical.IndexOf(edge.from);
    int to = logical.IndexOf(edge.to);
    int up = logical.operators[from].parallelism;
    int down = logical.operators[to].parallelism;
    if (edge.strategy.kind == shuffle::StrategyKind::Forward && up != down) {
      throw GraphError("forward edge " + edge.from + "->" + edge.to + " needs equal parallelism");
    }
    std::string scheme = edge.strategy.Describe() + "/" + std::to_string(up) + "x" +
                         std::to_string(down);
    auto [it, inserted] = scheme_index.try_emplace(scheme, static_cast<int>(g.descriptors.size()));
    if (inserted) g.descriptors.push_back({edge.strategy, up, down, scheme});
    for (int p = 0; p < up; ++p) {
      std::vector<int> targets;
      try {
        targets = shuffle::Candidates(edge.strategy, p, up, down);
      } catch (const ConfigError& err) {
        throw GraphError(std::string("edge ") + edge.from + "->" + edge.to + ": " + err.what());
      }
      for (int c : targets) {
        g.channels.push_back({{from, p}, {to, c}, static_cast<int>(e), it->second});
      }
    }
  }
  return g;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int Find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void Union(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

RegionPartition DeriveRegions(const ExecutionGraph& exec) {
  int n = exec.task_count();
  UnionFind uf(n);
  for (const auto& ch : exec.channels) uf.Union(exec.Flat(ch.producer), exec.Flat(ch.consumer));
  RegionPartition part;
  part.task_to_region.assign(n, -1);
  std::map<int, int> root_to_region;
  for (int t = 0; t < n; ++t) {
    int root = uf.Find(t);
    auto [it, inserted] = root_to_region.try_emplace(root, static_cast<int>(part.regions.size()));
    if (inserted) part.regions.emplace_back();
    part.regions[it->second].push_back(exec.tasks[t]);
    part.task_to_region[t] = it->second;
  }
  return part;
}

DedupStats DedupEdgeDescriptors(const ExecutionGraph& exec) {
  DedupStats s;
  s.descriptor_count = static_cast<int>(exec.descriptors.size());
  s.reuse_ratio = s.descriptor_count == 0
                      ? 0.0
                      : static_cast<double>(exec.channels.size()) / s.descriptor_count;
  return s;
}

}  // namespace streamlab::graph
