#pragma once

#include <string>
#include <vector>

#include "streamlab/common/types.h"
#include "streamlab/shuffle/strategy.h"

namespace streamlab::graph {

enum class OperatorKind { Source, Filter, WindowCount, Lookup, Join, Sink };

std::string KindName(OperatorKind kind);
OperatorKind ParseKind(const std::string& name);

struct OperatorSpec {
  std::string id;
  OperatorKind kind = OperatorKind::Source;
  int parallelism = 1;
  double selectivity = 1.0;
  // Base per-record service time; 0 means "use the engine default".
  SimTime service_time = 0;
};

struct EdgeSpec {
  std::string from;
  std::string to;
  shuffle::ShuffleStrategy strategy;
};

class LogicalGraph {
 public:
  std::vector<OperatorSpec> operators;
  std::vector<EdgeSpec> edges;

  LogicalGraph& Add(OperatorSpec op);
  LogicalGraph& Connect(const std::string& from, const std::string& to, shuffle::ShuffleStrategy s);

  int IndexOf(const std::string& id) const;  // -1 when absent
  // Throws GraphError on cycles, bad parallelism, dangling ids or
  // non-sources without inputs.
  void Validate() const;
  std::vector<int> TopologicalOrder() const;
  std::vector<int> Upstream(int op) const;    // edge indices into op
  std::vector<int> Downstream(int op) const;  // edge indices out of op
  bool IsSource(int op) const { return operators[op].kind == OperatorKind::Source; }
  bool IsTerminal(int op) const { return Downstream(op).empty(); }
};

struct EdgeDescriptor {
  shuffle::ShuffleStrategy strategy;
  int up = 0;
  int down = 0;
  std::string scheme;  // canonical (strategy, partition shape) key
};

struct Channel {
  TaskId producer;
  TaskId consumer;
  int edge = 0;        // index into LogicalGraph::edges
  int descriptor = 0;  // index into ExecutionGraph::descriptors
};

class ExecutionGraph {
 public:
  LogicalGraph logical;
  std::vector<TaskId> tasks;  // operator order, then subtask order
  std::vector<Channel> channels;
  std::vector<EdgeDescriptor> descriptors;
  std::vector<TmId> placement;  // by flat task index
  std::vector<int> op_offset;   // flat index of subtask 0 per operator
  int slots_per_tm = 1;
  int num_tms = 0;

  int Flat(TaskId id) const { return op_offset[id.op] + id.subtask; }
  TaskId At(int flat) const { return tasks[flat]; }
  TmId PlacementOf(TaskId id) const { return placement[Flat(id)]; }
  int task_count() const { return static_cast<int>(tasks.size()); }
};

struct RegionPartition {
  std::vector<std::vector<TaskId>> regions;
  std::vector<int> task_to_region;  // by flat task index

  int RegionOf(const ExecutionGraph& g, TaskId id) const { return task_to_region[g.Flat(id)]; }
  int count() const { return static_cast<int>(regions.size()); }
};

struct DedupStats {
  int descriptor_count = 0;
  double reuse_ratio = 0;
};

ExecutionGraph Expand(const LogicalGraph& logical, int slots_per_tm);
RegionPartition DeriveRegions(const ExecutionGraph& exec);
DedupStats DedupEdgeDescriptors(const ExecutionGraph& exec);

}  // namespace streamlab::graph
