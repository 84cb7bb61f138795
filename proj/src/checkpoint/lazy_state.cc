#include "streamlab/checkpoint/lazy_state.h"

#include "streamlab/shuffle/partitioner.h"

namespace streamlab::checkpoint {

SimTime ResumeDelay(RestoreMode mode, const RestoreCost& cost) {
  if (mode == RestoreMode::Lazy) return cost.manifest;
  return cost.manifest + cost.chunk_fetch * cost.chunks;
}

LazyStateBackend::LazyStateBackend(std::map<std::uint64_t, std::int64_t> snapshot, int chunks)
    : snapshot_(std::move(snapshot)), resident_(chunks, false), chunks_(chunks) {
  if (snapshot_.empty()) {
    resident_.assign(chunks_, true);
    resident_count_ = chunks_;
  }
}

int LazyStateBackend::ChunkOf(std::uint64_t key, int chunks) {
  return static_cast<int>(shuffle::StableHash(key, 0x1a2b, 0x3c4d) % static_cast<std::uint64_t>(chunks));
}

std::optional<int> LazyStateBackend::NeedsFetch(std::uint64_t key) const {
  int c = ChunkOf(key, chunks_);
  if (resident_[c]) return std::nullopt;
  return c;
}

void LazyStateBackend::Install(int chunk) {
  if (resident_[chunk]) return;
  resident_[chunk] = true;
  ++resident_count_;
  for (const auto& [k, v] : snapshot_) {
    if (ChunkOf(k, chunks_) == chunk && !live_.count(k)) live_[k] = v;
  }
}

int LazyStateBackend::NextPrefetch() const {
  for (int c = 0; c < chunks_; ++c) {
    if (!resident_[c]) return c;
  }
  return -1;
}

std::int64_t LazyStateBackend::Get(std::uint64_t key) const {
  if (!IsResident(key)) throw EngineError("read of non-resident key");
  auto it = live_.find(key);
  return it == live_.end() ? 0 : it->second;
}

void LazyStateBackend::Put(std::uint64_t key, std::int64_t value) {
  if (!IsResident(key)) throw EngineError("write to non-resident key");
  live_[key] = value;
}

}  // namespace streamlab::checkpoint
