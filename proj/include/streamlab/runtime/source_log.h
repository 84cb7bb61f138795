#pragma once

#include <cstdint>
#include <vector>

#include "streamlab/common/types.h"

namespace streamlab::runtime {

struct RateStep {
  SimTime start = 0;
  double rate = 0;  // records per second
};

enum class KeyMode { Zipf, Offset };

struct SourceProfile {
  std::vector<RateStep> steps{{0, 100.0}};
  SimTime end = 60 * kSecond;  // last admissible arrival
  double zipf_s = 0.0;
  std::uint64_t key_space = 1000;
  KeyMode key_mode = KeyMode::Zipf;
  std::uint64_t key_base = 0;  // Offset mode: key = key_base + offset
  // Feedback side of a stitching job: arrival shifted by `delay`, a
  // fraction of samples never arrives.
  SimTime delay = 0;
  double missing_fraction = 0;
  int side = 0;
};

// Zipf(s) over ranks 1..n via an inverse-CDF table.
class ZipfTable {
 public:
  ZipfTable(std::uint64_t n, double s);
  std::uint64_t Sample(double u) const;  // 0-based rank
  double Probability(std::uint64_t rank) const;

 private:
  std::vector<double> cdf_;
};

// Deterministic replayable log: offset i arrives at the instant the
// integrated rate reaches i+1, its key is a counter-based draw.
class SourceLog {
 public:
  SourceLog(SourceProfile profile, std::uint64_t seed);

  std::int64_t size() const { return size_; }
  SimTime ArrivalTime(std::int64_t i) const;
  std::int64_t CountBy(SimTime t) const;  // offsets with arrival <= t
  std::uint64_t KeyOf(std::int64_t i) const;
  bool Present(std::int64_t i) const;
  const SourceProfile& profile() const { return profile_; }

 private:
  double Cumulative(SimTime t) const;  // records arrived by t (real-valued)

  SourceProfile profile_;
  std::uint64_t seed_;
  std::vector<double> seg_count_;  // cumulative count at each step start
  ZipfTable zipf_;
  std::int64_t size_ = 0;
};

}  // namespace streamlab::runtime
