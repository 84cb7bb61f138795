#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "streamlab/common/types.h"

namespace streamlab::checkpoint {

// Opaque snapshot payload; the runtime stores its task state behind this.
class StateBlob {
 public:
  virtual ~StateBlob() = default;
};

struct StoreModel {
  SimTime put_base = 5 * kMillisecond;
  double put_ns_per_byte = 1.0;
  SimTime get_base = 5 * kMillisecond;
  double get_ns_per_byte = 1.0;
};

// Latency/size model of the checkpoint store with a slow-upload fault hook.
class SnapshotStore {
 public:
  SnapshotStore(StoreModel model, std::uint64_t seed) : model_(model), rng_(seed) {}

  const StoreModel& model() const { return model_; }
  void set_model(const StoreModel& m) { model_ = m; }

  // Every upload draws one Bernoulli(p_slow); a hit adds `delay`.
  void SetSlow(double p_slow, SimTime delay) {
    p_slow_ = p_slow;
    slow_delay_ = delay;
  }
  double p_slow() const { return p_slow_; }
  SimTime slow_delay() const { return slow_delay_; }

  void SetAvailable(bool up) { available_ = up; }
  bool available() const { return available_; }

  // Starts an upload and returns its duration, or nullopt when the store is
  // down.
  std::optional<SimTime> BeginPut(std::int64_t bytes);
  void CompletePut(const std::string& key, std::int64_t bytes, std::shared_ptr<const StateBlob> blob);

  SimTime GetLatency(std::int64_t bytes) const;
  bool Contains(const std::string& key) const { return entries_.count(key) > 0; }
  std::shared_ptr<const StateBlob> Get(const std::string& key) const;
  std::int64_t SizeOf(const std::string& key) const;
  // Drops the payload of a superseded snapshot; metadata stays.
  void Compact(const std::string& key);

  std::int64_t puts() const { return puts_; }
  std::int64_t slow_hits() const { return slow_hits_; }

 private:
  struct Entry {
    std::int64_t bytes = 0;
    std::shared_ptr<const StateBlob> blob;
  };
  StoreModel model_;
  std::mt19937_64 rng_;
  double p_slow_ = 0;
  SimTime slow_delay_ = 0;
  bool available_ = true;
  std::map<std::string, Entry> entries_;
  std::int64_t puts_ = 0;
  std::int64_t slow_hits_ = 0;
};

}  // namespace streamlab::checkpoint
