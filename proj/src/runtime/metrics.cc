#include "streamlab/runtime/metrics.h"

#include <algorithm>
#include <cmath>

namespace streamlab::runtime {

int LatencyHistogram::BinOf(SimTime latency) {
  double us = std::max<double>(0.0, static_cast<double>(latency) / kMicrosecond);
  int b = static_cast<int>(std::floor(std::log2(us + 1.0) * 8.0));
  return std::clamp(b, 0, kBins - 1);
}

SimTime LatencyHistogram::UpperEdge(int bin) {
  double us = std::exp2((bin + 1) / 8.0) - 1.0;
  return static_cast<SimTime>(std::llround(us * kMicrosecond));
}

void LatencyHistogram::Add(SimTime latency) {
  ++bins_[BinOf(latency)];
  ++count_;
}

void LatencyHistogram::Merge(const LatencyHistogram& o) {
  for (int i = 0; i < kBins; ++i) bins_[i] += o.bins_[i];
  count_ += o.count_;
}

SimTime LatencyHistogram::Percentile(double q) const {
  if (count_ == 0) return 0;
  auto rank = static_cast<std::int64_t>(std::ceil(q * static_cast<double>(count_)));
  rank = std::max<std::int64_t>(rank, 1);
  std::int64_t seen = 0;
  for (int i = 0; i < kBins; ++i) {
    seen += bins_[i];
    if (seen >= rank) return UpperEdge(i);
  }
  return UpperEdge(kBins - 1);
}

namespace {
void Bump(std::vector<std::int64_t>& v, SimTime t, std::int64_t n) {
  auto b = static_cast<std::size_t>(t / kSecond);
  if (v.size() <= b) v.resize(b + 1, 0);
  v[b] += n;
}
}  // namespace

void RuntimeMetrics::CountQps(SimTime t, std::int64_t n) { Bump(qps, t, n); }
void RuntimeMetrics::CountOutput(SimTime t, std::int64_t n) { Bump(output, t, n); }

void RuntimeMetrics::AddLatency(SimTime t, SimTime lat) {
  auto b = static_cast<std::size_t>(t / kSecond);
  if (latency.size() <= b) latency.resize(b + 1);
  if (!latency[b]) latency[b] = std::make_unique<LatencyHistogram>();
  latency[b]->Add(lat);
}

}  // namespace streamlab::runtime
