#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "streamlab/common/types.h"

namespace streamlab::checkpoint {

enum class RestoreMode { Eager, Lazy };

inline constexpr int kLazyChunks = 64;

struct RestoreCost {
  SimTime manifest = 0;     // metadata fetch before anything can run
  SimTime chunk_fetch = 0;  // one chunk
  int chunks = kLazyChunks;
};

// Time from restore start until the task may run again.
SimTime ResumeDelay(RestoreMode mode, const RestoreCost& cost);

// Keyed state restored chunk by chunk. Reads of any key return the snapshot
// value; a non-resident chunk must be installed first (the caller models the
// fetch latency and parks the reader meanwhile).
class LazyStateBackend {
 public:
  LazyStateBackend() = default;
  LazyStateBackend(std::map<std::uint64_t, std::int64_t> snapshot, int chunks = kLazyChunks);

  static int ChunkOf(std::uint64_t key, int chunks = kLazyChunks);

  int chunks() const { return chunks_; }
  bool IsResident(std::uint64_t key) const { return resident_[ChunkOf(key, chunks_)]; }
  bool ChunkResident(int chunk) const { return resident_[chunk]; }
  // Chunk to fetch before `key` can be read, if any.
  std::optional<int> NeedsFetch(std::uint64_t key) const;
  void Install(int chunk);
  // Lowest non-resident chunk in manifest order, or -1.
  int NextPrefetch() const;
  bool AllResident() const { return resident_count_ == chunks_; }
  int resident_count() const { return resident_count_; }

  // Throws EngineError for a non-resident key.
  std::int64_t Get(std::uint64_t key) const;
  void Put(std::uint64_t key, std::int64_t value);
  const std::map<std::uint64_t, std::int64_t>& live() const { return live_; }

 private:
  std::map<std::uint64_t, std::int64_t> snapshot_;
  std::map<std::uint64_t, std::int64_t> live_;
  std::vector<bool> resident_ = std::vector<bool>(kLazyChunks, false);
  int chunks_ = kLazyChunks;
  int resident_count_ = 0;
};

}  // namespace streamlab::checkpoint
