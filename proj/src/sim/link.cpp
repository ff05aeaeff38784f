#include "afmt/sim/link.hpp"

#include <stdexcept>

namespace afmt::sim {

Link::Link(EventLoop& loop, std::string name, LinkConfig config, Deliver deliver)
    : loop_(loop), name_(std::move(name)), config_(config), deliver_(std::move(deliver)) {
  if (config_.data_rate_bps == 0) throw std::invalid_argument("Link " + name_ + ": data rate must be positive");
  if (config_.queue_capacity == 0) throw std::invalid_argument("Link " + name_ + ": queue capacity must be >= 1");
}

TxOutcome Link::transmit(Packet packet) {
  if (on_wire_) {
    if (queue_.size() >= config_.queue_capacity) {
      ++counters_.dropped;
      return TxOutcome::dropped;
    }
    packet.enqueued_at = loop_.now();
    queue_.push_back(std::move(packet));
  } else {
    packet.enqueued_at = loop_.now();
    start_transmission(std::move(packet));
  }
  ++counters_.enqueued;
  return TxOutcome::enqueued;
}

void Link::start_transmission(Packet packet) {
  const Nanos tx = serialization_time(packet.size, config_.data_rate_bps);
  on_wire_ = std::move(packet);
  loop_.schedule_in(tx, [this] { finish_transmission(); });
}

void Link::finish_transmission() {
  propagating_.push_back(std::move(*on_wire_));
  on_wire_.reset();
  loop_.schedule_in(config_.propagation_delay, [this] { arrive(); });
  if (!queue_.empty()) {
    Packet next = std::move(queue_.front());
    queue_.pop_front();
    start_transmission(std::move(next));
  }
}

void Link::arrive() {
  // constant delay: arrivals leave the propagation FIFO in order
  Packet p = std::move(propagating_.front());
  propagating_.pop_front();
  ++counters_.delivered;
  counters_.bytes_delivered += p.size;
  deliver_(std::move(p));
}

}  // namespace afmt::sim
