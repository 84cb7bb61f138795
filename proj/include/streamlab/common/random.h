#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace streamlab {

// splitmix64 finalizer; the building block for stable hashing and
// counter-based random draws.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform double in [0, 1) from a 64-bit value.
constexpr double UnitDouble(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// All randomness in a run derives from one seed through named sub-streams,
// so adding draws to one stream never perturbs another.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t SubSeed(std::string_view name, std::uint64_t index = 0) const {
    return Mix64(seed_ ^ Mix64(Fnv1a(name) + index));
  }

  std::mt19937_64 Stream(std::string_view name, std::uint64_t index = 0) const {
    return std::mt19937_64(SubSeed(name, index));
  }

 private:
  std::uint64_t seed_;
};

}  // namespace streamlab
