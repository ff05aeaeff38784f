#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

namespace afmt::sim {

using Nanos = std::chrono::nanoseconds;
/// Nanoseconds since simulation start.
using SimTime = Nanos;

/// Single-threaded discrete-event scheduler. Events are ordered by
/// (time, insertion sequence), so equal-time events run FIFO.
class EventLoop {
 public:
  using Action = std::function<void()>;

  [[nodiscard]] SimTime now() const noexcept { return now_; }

  void schedule_at(SimTime at, Action action);
  void schedule_in(Nanos delay, Action action) { schedule_at(now_ + delay, std::move(action)); }

  /// Runs every event with time <= horizon, then advances the clock to horizon.
  void run_until(SimTime horizon);
  /// Runs the earliest pending event. Returns false if none is pending.
  bool step();

  [[nodiscard]] std::size_t pending() const noexcept { return heap_.size(); }
  [[nodiscard]] std::uint64_t executed() const noexcept { return executed_; }

 private:
  struct Event {
    SimTime at;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  Event pop();

  std::vector<Event> heap_;
  SimTime now_{0};
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
};

/// Re-armable one-shot timer. Re-arming or cancelling invalidates the
/// previously scheduled firing.
class Timer {
 public:
  explicit Timer(EventLoop& loop) : loop_(&loop) {}
  Timer(const Timer&) = delete;
  Timer& operator=(const Timer&) = delete;

  void arm(SimTime at, EventLoop::Action action);
  void cancel() noexcept {
    ++generation_;
    armed_ = false;
  }
  [[nodiscard]] bool armed() const noexcept { return armed_; }
  [[nodiscard]] SimTime expiry() const noexcept { return expiry_; }

 private:
  EventLoop* loop_;
  std::uint64_t generation_ = 0;
  bool armed_ = false;
  SimTime expiry_{0};
};

}  // namespace afmt::sim
