#include "streamlab/checkpoint/snapshot_store.h"

#include <cmath>

#include "streamlab/common/random.h"

namespace streamlab::checkpoint {

std::optional<SimTime> SnapshotStore::BeginPut(std::int64_t bytes) {
  if (!available_) return std::nullopt;
  ++puts_;
  double u = UnitDouble(rng_());
  SimTime t = model_.put_base + static_cast<SimTime>(std::llround(bytes * model_.put_ns_per_byte));
  if (u < p_slow_) {
    ++slow_hits_;
    t += slow_delay_;
  }
  return t;
}

void SnapshotStore::CompletePut(const std::string& key, std::int64_t bytes,
                                std::shared_ptr<const StateBlob> blob) {
  entries_[key] = Entry{bytes, std::move(blob)};
}

SimTime SnapshotStore::GetLatency(std::int64_t bytes) const {
  return model_.get_base + static_cast<SimTime>(std::llround(bytes * model_.get_ns_per_byte));
}

std::shared_ptr<const StateBlob> SnapshotStore::Get(const std::string& key) const {
  if (!available_) throw EngineError("snapshot store unavailable");
  auto it = entries_.find(key);
  if (it == entries_.end()) throw EngineError("snapshot '" + key + "' not found");
  return it->second.blob;
}

std::int64_t SnapshotStore::SizeOf(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.bytes;
}

void SnapshotStore::Compact(const std::string& key) {
  auto it = entries_.find(key);
  if (it != entries_.end()) it->second.blob.reset();
}

}  // namespace streamlab::checkpoint
