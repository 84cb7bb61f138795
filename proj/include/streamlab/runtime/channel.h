#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>

#include "streamlab/common/types.h"

namespace streamlab::runtime {

struct Record {
  std::uint64_t key = 0;
  std::int64_t value = 1;
  SimTime event_time = 0;
  SimTime emit_time = 0;
  std::int32_t source = -1;  // global source task index
  std::int64_t offset = -1;
  std::uint8_t side = 0;     // join input side
};

enum class ItemKind : std::uint8_t { Record, Barrier, Watermark, EndOfStream };

struct Item {
  ItemKind kind = ItemKind::Record;
  Record rec;
  std::int64_t marker = 0;  // checkpoint id or watermark
  int producer_epoch = 0;
  SimTime visible_at = 0;

  bool is_record() const { return kind == ItemKind::Record; }
};

enum class SendOutcome { Enqueued, Blocked };

// Bounded credit channel. Data records consume a credit; control items
// (barriers, watermarks, end-of-stream) bypass credit accounting but keep
// FIFO order with the data.
class Channel {
 public:
  struct Waiter {
    int owner = -1;
    std::function<void()> wake;
  };

  Channel(TaskId producer, TaskId consumer, int capacity)
      : producer_(producer), consumer_(consumer), capacity_(capacity) {}

  TaskId producer() const { return producer_; }
  TaskId consumer() const { return consumer_; }

  int capacity() const;
  int base_capacity() const { return capacity_; }
  void set_capacity_factor(double f) { capacity_factor_ = f; }
  int credits() const;
  int backlog() const { return data_count_; }
  std::size_t size() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }

  // Records need a credit; without one the record is not enqueued and the
  // waiter (if any) is parked until a credit comes back.
  SendOutcome Send(Item item, Waiter waiter);
  SendOutcome Send(Item item);
  void AddWaiter(Waiter w) { waiters_.push_back(std::move(w)); }
  std::size_t waiter_count() const { return waiters_.size(); }
  void RemoveWaiters(int owner);

  const Item& Front() const { return queue_.front(); }
  Item& Front() { return queue_.front(); }
  // Pops the head. When it was a data record, the oldest waiter is returned
  // so the caller can wake it (exactly one per freed credit).
  Item Pop(std::optional<Waiter>* woken = nullptr);

  // Removes items for which pred holds; returns the number of data records
  // removed. Frees credits, so all waiters are returned for waking.
  template <typename Pred>
  std::int64_t RemoveIf(Pred pred) {
    std::int64_t removed = 0;
    std::deque<Item> kept;
    for (auto& it : queue_) {
      if (pred(it)) {
        if (it.is_record()) ++removed;
      } else {
        kept.push_back(std::move(it));
      }
    }
    queue_.swap(kept);
    data_count_ -= static_cast<int>(removed);
    return removed;
  }
  std::deque<Waiter> TakeWaiters();

  const std::deque<Item>& items() const { return queue_; }

  // Added latency applied to newly sent items.
  void set_delay(SimTime d) { delay_ = d; }
  SimTime delay() const { return delay_; }

 private:
  TaskId producer_;
  TaskId consumer_;
  int capacity_;
  double capacity_factor_ = 1.0;
  int data_count_ = 0;
  SimTime delay_ = 0;
  std::deque<Item> queue_;
  std::deque<Waiter> waiters_;
};

}  // namespace streamlab::runtime
