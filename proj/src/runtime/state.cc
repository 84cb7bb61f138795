#include "streamlab/runtime/state.h"

namespace streamlab::runtime {

bool OffsetSet::Insert(int source, std::int64_t offset) {
  if (source < 0 || offset < 0) return true;
  if (static_cast<int>(bits_.size()) <= source) bits_.resize(source + 1);
  auto& words = bits_[source];
  auto w = static_cast<std::size_t>(offset >> 6);
  if (words.size() <= w) words.resize(w + 1 + w / 4, 0);
  std::uint64_t mask = std::uint64_t{1} << (offset & 63);
  if (words[w] & mask) return false;
  words[w] |= mask;
  ++count_;
  return true;
}

bool OffsetSet::Contains(int source, std::int64_t offset) const {
  if (source < 0 || offset < 0 || static_cast<int>(bits_.size()) <= source) return false;
  const auto& words = bits_[source];
  auto w = static_cast<std::size_t>(offset >> 6);
  return w < words.size() && (words[w] >> (offset & 63)) & 1;
}

void OffsetSet::Merge(const OffsetSet& other) {
  if (bits_.size() < other.bits_.size()) bits_.resize(other.bits_.size());
  count_ = 0;
  for (std::size_t s = 0; s < bits_.size(); ++s) {
    if (s < other.bits_.size()) {
      auto& a = bits_[s];
      const auto& b = other.bits_[s];
      if (a.size() < b.size()) a.resize(b.size(), 0);
      for (std::size_t w = 0; w < b.size(); ++w) a[w] |= b[w];
    }
    for (auto word : bits_[s]) count_ += __builtin_popcountll(word);
  }
}

void MergeLedger(Ledger& into, const Ledger& from) {
  for (const auto& [k, e] : from) {
    auto& d = into[k];
    d.records += e.records;
    d.value_sum += e.value_sum;
    d.digest += e.digest;
  }
}

std::int64_t OperatorState::KeyCount() const {
  return static_cast<std::int64_t>(windows.size() + pending.size() + ledger.size());
}

}  // namespace streamlab::runtime
