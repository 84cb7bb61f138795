#include "streamlab/runtime/channel.h"

#include <algorithm>
#include <cmath>

namespace streamlab::runtime {

int Channel::capacity() const {
  if (capacity_factor_ >= 1.0) return capacity_;
  return std::max(1, static_cast<int>(std::floor(capacity_ * capacity_factor_)));
}

int Channel::credits() const { return std::max(0, capacity() - data_count_); }

SendOutcome Channel::Send(Item item, Waiter waiter) {
  if (item.is_record()) {
    if (credits() == 0) {
      if (waiter.wake) waiters_.push_back(std::move(waiter));
      return SendOutcome::Blocked;
    }
    ++data_count_;
  }
  queue_.push_back(std::move(item));
  return SendOutcome::Enqueued;
}

SendOutcome Channel::Send(Item item) { return Send(std::move(item), Waiter{}); }

void Channel::RemoveWaiters(int owner) {
  std::erase_if(waiters_, [owner](const Waiter& w) { return w.owner == owner; });
}

Item Channel::Pop(std::optional<Waiter>* woken) {
  Item it = std::move(queue_.front());
  queue_.pop_front();
  if (it.is_record()) {
    --data_count_;
    if (!waiters_.empty() && woken != nullptr) {
      *woken = std::move(waiters_.front());
      waiters_.pop_front();
    }
  }
  return it;
}

std::deque<Channel::Waiter> Channel::TakeWaiters() {
  std::deque<Waiter> out;
  out.swap(waiters_);
  return out;
}

}  // namespace streamlab::runtime
