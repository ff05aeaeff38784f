#include "afmt/sim/event_loop.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace afmt::sim {

void EventLoop::schedule_at(SimTime at, Action action) {
  if (at < now_) {
    throw std::logic_error("EventLoop::schedule_at: time " + std::to_string(at.count()) +
                           "ns is before the clock " + std::to_string(now_.count()) + "ns");
  }
  heap_.push_back(Event{at, next_seq_++, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

EventLoop::Event EventLoop::pop() {
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Event e = std::move(heap_.back());
  heap_.pop_back();
  return e;
}

bool EventLoop::step() {
  if (heap_.empty()) return false;
  Event e = pop();
  now_ = e.at;
  ++executed_;
  e.action();
  return true;
}

void EventLoop::run_until(SimTime horizon) {
  while (!heap_.empty() && heap_.front().at <= horizon) step();
  if (horizon > now_) now_ = horizon;
}

void Timer::arm(SimTime at, EventLoop::Action action) {
  const std::uint64_t gen = ++generation_;
  armed_ = true;
  expiry_ = at;
  loop_->schedule_at(at, [this, gen, action = std::move(action)] {
    if (gen != generation_) return;
    armed_ = false;
    action();
  });
}

}  // namespace afmt::sim
