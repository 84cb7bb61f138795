#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace streamlab {

// Virtual time in nanoseconds since simulation start.
using SimTime = std::int64_t;

inline constexpr SimTime kNanosecond = 1;
inline constexpr SimTime kMicrosecond = 1000;
inline constexpr SimTime kMillisecond = 1000 * kMicrosecond;
inline constexpr SimTime kSecond = 1000 * kMillisecond;
inline constexpr SimTime kMinute = 60 * kSecond;
inline constexpr SimTime kHour = 60 * kMinute;

inline constexpr double ToSeconds(SimTime t) { return static_cast<double>(t) / kSecond; }
inline constexpr double ToMillis(SimTime t) { return static_cast<double>(t) / kMillisecond; }

// (operator index, subtask index) of a physical task.
struct TaskId {
  int op = -1;
  int subtask = -1;
  auto operator<=>(const TaskId&) const = default;
};

enum class TmId : std::int32_t {};

inline constexpr std::int32_t Value(TmId id) { return static_cast<std::int32_t>(id); }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GraphError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class EngineError : public Error { using Error::Error; };
class PolicyError : public Error { using Error::Error; };
class StartupError : public Error { using Error::Error; };
class VerdictError : public Error { using Error::Error; };

class MergeError : public Error {
 public:
  MergeError(int region, const std::string& what)
      : Error(what), region_(region) {}
  int region() const { return region_; }

 private:
  int region_;
};

class PlanError : public Error {
 public:
  PlanError(std::string location, const std::string& what)
      : Error(location + ": " + what), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

}  // namespace streamlab

template <>
struct std::hash<streamlab::TaskId> {
  std::size_t operator()(const streamlab::TaskId& id) const noexcept {
    return (static_cast<std::size_t>(id.op) << 32) ^ static_cast<std::size_t>(id.subtask);
  }
};
