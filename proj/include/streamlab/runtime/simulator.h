#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "streamlab/common/types.h"

namespace streamlab::runtime {

// Single-threaded discrete-event core. Events run in (time, seq) order where
// seq is assigned at scheduling time.
class Simulator {
 public:
  using Callback = std::function<void()>;

  explicit Simulator(std::size_t max_pending = 50'000'000) : max_pending_(max_pending) {}

  SimTime now() const { return now_; }

  std::uint64_t Schedule(SimTime at, Callback fn);
  std::uint64_t ScheduleAfter(SimTime delay, Callback fn) { return Schedule(now_ + delay, std::move(fn)); }

  // Processes every event with time <= t_end and leaves the clock at t_end.
  // Returns the number of events processed.
  std::uint64_t RunUntil(SimTime t_end);
  // Runs until the queue drains or `pred` holds after an event.
  std::uint64_t RunWhile(SimTime t_end, const std::function<bool()>& keep_going);

  std::size_t pending() const { return heap_.size(); }
  std::uint64_t processed() const { return processed_; }
  // Order-sensitive digest over (time, seq) of every processed event.
  std::uint64_t trace_digest() const { return digest_; }

 private:
  struct Event {
    SimTime time;
    std::uint64_t seq;
    Callback fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  bool Step(SimTime t_end);

  std::vector<Event> heap_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  std::uint64_t digest_ = 0;
  std::size_t max_pending_;
};

}  // namespace streamlab::runtime
