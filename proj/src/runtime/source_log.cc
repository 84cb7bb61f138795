#include "streamlab/runtime/source_log.h"

#include <algorithm>
#include <cmath>

#include "streamlab/common/random.h"

namespace streamlab::runtime {

ZipfTable::ZipfTable(std::uint64_t n, double s) {
  if (n == 0) n = 1;
  cdf_.resize(n);
  double total = 0;
  for (std::uint64_t r = 0; r < n; ++r) {
    total += s == 0 ? 1.0 : 1.0 / std::pow(static_cast<double>(r + 1), s);
    cdf_[r] = total;
  }
  for (auto& c : cdf_) c /= total;
}

std::uint64_t ZipfTable::Sample(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return cdf_.size() - 1;
  return static_cast<std::uint64_t>(it - cdf_.begin());
}

double ZipfTable::Probability(std::uint64_t rank) const {
  return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
}

SourceLog::SourceLog(SourceProfile profile, std::uint64_t seed)
    : profile_(std::move(profile)),
      seed_(seed),
      zipf_(profile_.key_mode == KeyMode::Zipf ? profile_.key_space : 1, profile_.zipf_s) {
  if (profile_.steps.empty() || profile_.steps.front().start != 0) {
    throw ConfigError("source rate profile must start at t=0");
  }
  for (const auto& s : profile_.steps) {
    if (s.rate <= 0) throw ConfigError("source rates must be > 0");
  }
  seg_count_.push_back(0);
  for (std::size_t k = 1; k < profile_.steps.size(); ++k) {
    const auto& prev = profile_.steps[k - 1];
    seg_count_.push_back(seg_count_.back() +
                         prev.rate * ToSeconds(profile_.steps[k].start - prev.start));
  }
  size_ = static_cast<std::int64_t>(std::floor(Cumulative(profile_.end) + 1e-9));
}

double SourceLog::Cumulative(SimTime t) const {
  std::size_t k = profile_.steps.size() - 1;
  while (k > 0 && profile_.steps[k].start > t) --k;
  return seg_count_[k] + profile_.steps[k].rate * ToSeconds(t - profile_.steps[k].start);
}

SimTime SourceLog::ArrivalTime(std::int64_t i) const {
  double need = static_cast<double>(i + 1);
  std::size_t k = 0;
  while (k + 1 < profile_.steps.size() && seg_count_[k + 1] < need) ++k;
  const auto& step = profile_.steps[k];
  double t = static_cast<double>(step.start) + (need - seg_count_[k]) / step.rate * 1e9;
  return static_cast<SimTime>(std::floor(t + 1e-6)) + profile_.delay;
}

std::int64_t SourceLog::CountBy(SimTime t) const {
  t -= profile_.delay;
  if (t < 0) return 0;
  auto n = static_cast<std::int64_t>(std::floor(Cumulative(std::min(t, profile_.end)) + 1e-9));
  return std::min(n, size_);
}

std::uint64_t SourceLog::KeyOf(std::int64_t i) const {
  if (profile_.key_mode == KeyMode::Offset) return profile_.key_base + static_cast<std::uint64_t>(i);
  return zipf_.Sample(UnitDouble(Mix64(seed_ ^ Mix64(static_cast<std::uint64_t>(i)))));
}

bool SourceLog::Present(std::int64_t i) const {
  if (profile_.missing_fraction <= 0) return true;
  // Keyed by offset only so both sides of a stitching job agree.
  double u = UnitDouble(Mix64(0x6d15516ULL ^ Mix64(static_cast<std::uint64_t>(i) + 77)));
  return u >= profile_.missing_fraction;
}

}  // namespace streamlab::runtime
