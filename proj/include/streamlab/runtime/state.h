#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "streamlab/checkpoint/snapshot_store.h"
#include "streamlab/common/types.h"

namespace streamlab::runtime {

// Set of (source, offset) pairs as one bitmap per source.
class OffsetSet {
 public:
  // Returns false if already present.
  bool Insert(int source, std::int64_t offset);
  bool Contains(int source, std::int64_t offset) const;
  void Merge(const OffsetSet& other);
  std::int64_t count() const { return count_; }

 private:
  std::vector<std::vector<std::uint64_t>> bits_;
  std::int64_t count_ = 0;
};

struct LedgerEntry {
  std::int64_t records = 0;
  std::int64_t value_sum = 0;
  std::uint64_t digest = 0;  // order-independent content fingerprint

  bool operator==(const LedgerEntry&) const = default;
};

using Ledger = std::map<std::uint64_t, LedgerEntry>;

void MergeLedger(Ledger& into, const Ledger& from);

struct JoinPending {
  bool has_a = false;
  bool has_b = false;
  SimTime since = 0;
  SimTime emit_time = 0;
};

// Everything a task checkpoints.
struct OperatorState {
  // Sources.
  std::int64_t next_offset = 0;
  SimTime last_watermark = -1;
  // Window counting: (window end, key) -> count.
  std::map<std::pair<SimTime, std::uint64_t>, std::int64_t> windows;
  std::vector<SimTime> input_watermarks;
  SimTime output_watermark = -1;
  // Join.
  std::map<std::uint64_t, JoinPending> pending;
  // Terminal operators.
  Ledger ledger;
  OffsetSet seen;

  std::int64_t KeyCount() const;
};

struct TaskSnapshot : checkpoint::StateBlob {
  explicit TaskSnapshot(OperatorState s) : state(std::move(s)) {}
  OperatorState state;
};

}  // namespace streamlab::runtime
