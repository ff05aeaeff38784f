#pragma once

#include <cstdint>
#include <vector>

#include "afmt/sim/event_loop.hpp"
#include "afmt/sim/packet.hpp"
#include "afmt/transport/tcp.hpp"

namespace afmt::transport {

/// IPv4 + UDP header bytes added to each datagram.
inline constexpr std::uint32_t kUdpHeaderBytes = 28;

/// Connectionless datagram sender: no state beyond a packet counter.
class UdpSocket {
 public:
  UdpSocket(EventLoop& loop, FlowId flow, Egress egress) : loop_(loop), flow_(flow), egress_(std::move(egress)) {}

  void send(std::vector<std::uint8_t> payload) {
    Packet p;
    p.flow = flow_;
    p.size = kUdpHeaderBytes + static_cast<std::uint32_t>(payload.size());
    p.seq = next_packet_seq_++;
    p.created_at = loop_.now();
    p.data = std::move(payload);
    egress_(std::move(p));
  }

  [[nodiscard]] std::uint64_t sent() const noexcept { return next_packet_seq_; }
  [[nodiscard]] const FlowId& flow() const noexcept { return flow_; }

 private:
  EventLoop& loop_;
  FlowId flow_;
  Egress egress_;
  std::uint64_t next_packet_seq_ = 0;
};

}  // namespace afmt::transport
