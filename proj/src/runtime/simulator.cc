#include "streamlab/runtime/simulator.h"

#include <algorithm>

#include "streamlab/common/random.h"

namespace streamlab::runtime {

std::uint64_t Simulator::Schedule(SimTime at, Callback fn) {
  if (at < now_) at = now_;
  if (heap_.size() >= max_pending_) {
    throw EngineError("event queue overflow (" + std::to_string(heap_.size()) + " pending)");
  }
  std::uint64_t seq = next_seq_++;
  heap_.push_back({at, seq, std::move(fn)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return seq;
}

bool Simulator::Step(SimTime t_end) {
  if (heap_.empty() || heap_.front().time > t_end) return false;
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Event ev = std::move(heap_.back());
  heap_.pop_back();
  now_ = ev.time;
  ++processed_;
  digest_ = Mix64(digest_ ^ Mix64(static_cast<std::uint64_t>(ev.time) * 31 + ev.seq));
  ev.fn();
  return true;
}

std::uint64_t Simulator::RunUntil(SimTime t_end) {
  std::uint64_t count = 0;
  while (Step(t_end)) ++count;
  if (t_end > now_) now_ = t_end;
  return count;
}

std::uint64_t Simulator::RunWhile(SimTime t_end, const std::function<bool()>& keep_going) {
  std::uint64_t count = 0;
  while (keep_going() && Step(t_end)) ++count;
  return count;
}

}  // namespace streamlab::runtime
