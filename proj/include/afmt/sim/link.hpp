#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>

#include "afmt/sim/event_loop.hpp"
#include "afmt/sim/packet.hpp"

namespace afmt::sim {

inline constexpr Nanos kDefaultPropagationDelay{6560};
inline constexpr std::size_t kDefaultQueueCapacity = 100;

struct LinkConfig {
  std::uint64_t data_rate_bps = 1'000'000'000;
  Nanos propagation_delay = kDefaultPropagationDelay;
  std::size_t queue_capacity = kDefaultQueueCapacity;  // packets waiting, excluding the one on the wire
};

/// Time to clock `bytes` onto a link, rounded up to whole nanoseconds.
constexpr Nanos serialization_time(std::uint64_t bytes, std::uint64_t rate_bps) {
  const std::uint64_t bits_ns = bytes * 8 * 1'000'000'000ULL;
  return Nanos{static_cast<Nanos::rep>((bits_ns + rate_bps - 1) / rate_bps)};
}

struct LinkCounters {
  std::uint64_t enqueued = 0;
  std::uint64_t dropped = 0;
  std::uint64_t delivered = 0;
  std::uint64_t bytes_delivered = 0;
};

enum class TxOutcome { enqueued, dropped };

/// Unidirectional point-to-point link with a drop-tail FIFO.
class Link {
 public:
  using Deliver = std::function<void(Packet&&)>;

  Link(EventLoop& loop, std::string name, LinkConfig config, Deliver deliver);
  Link(const Link&) = delete;
  Link& operator=(const Link&) = delete;

  TxOutcome transmit(Packet packet);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const LinkConfig& config() const noexcept { return config_; }
  [[nodiscard]] const LinkCounters& counters() const noexcept { return counters_; }
  [[nodiscard]] std::size_t queued() const noexcept { return queue_.size(); }
  /// Packets accepted but not yet delivered: queued, serializing, or propagating.
  [[nodiscard]] std::size_t in_flight() const noexcept {
    return queue_.size() + (on_wire_ ? 1 : 0) + propagating_.size();
  }

 private:
  void start_transmission(Packet packet);
  void finish_transmission();
  void arrive();

  EventLoop& loop_;
  std::string name_;
  LinkConfig config_;
  Deliver deliver_;
  LinkCounters counters_;
  std::deque<Packet> queue_;
  std::optional<Packet> on_wire_;
  std::deque<Packet> propagating_;
};

}  // namespace afmt::sim
