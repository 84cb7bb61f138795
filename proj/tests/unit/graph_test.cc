#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "streamlab/graph/graph.h"
#include "streamlab/graph/job_file.h"

using namespace streamlab;
using namespace streamlab::graph;
using shuffle::ShuffleStrategy;

namespace {

OperatorSpec Op(const std::string& id, OperatorKind kind, int p) {
  OperatorSpec s;
  s.id = id;
  s.kind = kind;
  s.parallelism = p;
  return s;
}

// Plain union-find over flat task indices, fed straight from the channels.
int ComponentCount(const ExecutionGraph& g) {
  std::vector<int> parent(g.task_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& c : g.channels) parent[find(g.Flat(c.producer))] = find(g.Flat(c.consumer));
  std::set<int> roots;
  for (int i = 0; i < g.task_count(); ++i) roots.insert(find(i));
  return static_cast<int>(roots.size());
}

}  // namespace

TEST(Graph, TwoOperatorJobExpandsToTwoPTasks) {
  LogicalGraph g;
  g.Add(Op("src", OperatorKind::Source, 6)).Add(Op("f", OperatorKind::Filter, 6));
  g.Connect("src", "f", ShuffleStrategy::Rebalance());
  auto e = Expand(g, 4);
  EXPECT_EQ(e.task_count(), 12);
  EXPECT_EQ(e.channels.size(), 36u);
  EXPECT_EQ(e.num_tms, 3);
}

TEST(Graph, ForwardChainRegionsMatchUnionFind) {
  LogicalGraph g;
  g.Add(Op("src", OperatorKind::Source, 7)).Add(Op("f", OperatorKind::Filter, 7)).Add(Op("sink", OperatorKind::Sink, 7));
  g.Connect("src", "f", ShuffleStrategy::Forward());
  g.Connect("f", "sink", ShuffleStrategy::Forward());
  auto e = Expand(g, 2);
  auto r = DeriveRegions(e);
  EXPECT_EQ(r.count(), 7);
  EXPECT_EQ(r.count(), ComponentCount(e));
  EXPECT_EQ(r.RegionOf(e, {0, 3}), r.RegionOf(e, {2, 3}));
  EXPECT_NE(r.RegionOf(e, {0, 3}), r.RegionOf(e, {0, 4}));
}

TEST(Graph, GroupRescaleGroupsBecomeRegions) {
  for (int groups : {1, 2, 4}) {
    LogicalGraph g;
    g.Add(Op("src", OperatorKind::Source, 8)).Add(Op("sink", OperatorKind::Sink, 8));
    g.Connect("src", "sink", ShuffleStrategy::GroupRescale(groups));
    auto e = Expand(g, 4);
    auto r = DeriveRegions(e);
    EXPECT_EQ(r.count(), groups);
    EXPECT_EQ(r.count(), ComponentCount(e));
  }
}

TEST(Graph, AllToAllEdgeDedupsToOneDescriptor) {
  LogicalGraph g;
  g.Add(Op("src", OperatorKind::Source, 4)).Add(Op("sink", OperatorKind::Sink, 4));
  g.Connect("src", "sink", ShuffleStrategy::KeyHash());
  auto e = Expand(g, 4);
  // Brute force: distinct (strategy, up, down) among channels.
  std::set<std::string> distinct;
  for (const auto& c : e.channels) distinct.insert(e.descriptors[c.descriptor].scheme);
  auto d = DedupEdgeDescriptors(e);
  EXPECT_EQ(d.descriptor_count, 1);
  EXPECT_EQ(static_cast<int>(distinct.size()), 1);
  EXPECT_DOUBLE_EQ(d.reuse_ratio, 16.0);
}

TEST(Graph, ValidateRejectsCyclesAndDanglingEdges) {
  LogicalGraph g;
  g.Add(Op("src", OperatorKind::Source, 1)).Add(Op("a", OperatorKind::Filter, 1)).Add(Op("b", OperatorKind::Filter, 1));
  g.Connect("src", "a", ShuffleStrategy::Rebalance());
  g.Connect("a", "b", ShuffleStrategy::Rebalance());
  g.Connect("b", "a", ShuffleStrategy::Rebalance());
  EXPECT_THROW(g.Validate(), GraphError);

  LogicalGraph h;
  h.Add(Op("src", OperatorKind::Source, 1));
  h.Connect("src", "nowhere", ShuffleStrategy::Rebalance());
  EXPECT_THROW(h.Validate(), GraphError);
}

TEST(Graph, ForwardWithUnequalParallelismIsRejected) {
  LogicalGraph g;
  g.Add(Op("src", OperatorKind::Source, 2)).Add(Op("sink", OperatorKind::Sink, 3));
  g.Connect("src", "sink", ShuffleStrategy::Forward());
  EXPECT_ANY_THROW(Expand(g, 1));
}

TEST(JobFile, RoundTrips) {
  nlohmann::json doc = {
      {"operators",
       {{{"id", "src"}, {"kind", "source"}, {"parallelism", 2}},
        {{"id", "w"}, {"kind", "window_count"}, {"parallelism", 3}, {"service_us", 50}}}},
      {"edges", {{{"from", "src"}, {"to", "w"}, {"strategy", "weakhash"}, {"params", {{"k", 3}}}}}}};
  auto g = LogicalGraphFromJson(doc);
  ASSERT_EQ(g.operators.size(), 2u);
  EXPECT_EQ(g.edges[0].strategy.k, 3);
  EXPECT_EQ(g.operators[1].service_time, 50 * kMicrosecond);
  auto again = LogicalGraphFromJson(LogicalGraphToJson(g));
  EXPECT_EQ(LogicalGraphToJson(again), LogicalGraphToJson(g));
}
