#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "afmt/sched/flow_id.hpp"
#include "afmt/sim/event_loop.hpp"

namespace afmt::sim {

using sched::Address;
using sched::FlowId;

/// Transport header fields used by the simulated TCP. Byte sequence numbers
/// are stream offsets; timestamps follow the TCP timestamp option.
struct TcpHeader {
  std::uint64_t seq = 0;
  std::uint64_t ack = 0;
  std::uint32_t payload_len = 0;
  bool is_ack = false;
  bool syn = false;  // connection setup; SYN and SYN-ACK carry no data
  bool has_ecr = false;
  SimTime ts_val{0};
  SimTime ts_ecr{0};
};

struct Packet {
  std::uint32_t size = 0;  // on-wire bytes
  FlowId flow;
  std::uint64_t seq = 0;  // per-flow transmission counter, never reused
  SimTime created_at{0};
  SimTime enqueued_at{0};
  TcpHeader tcp;
  std::vector<std::uint8_t> data;  // carried bytes (tunnel traffic only)

  [[nodiscard]] Address src_addr() const noexcept { return flow.src_addr; }
  [[nodiscard]] Address dst_addr() const noexcept { return flow.dst_addr; }
  [[nodiscard]] std::uint8_t protocol() const noexcept { return flow.protocol; }
  [[nodiscard]] std::uint16_t src_port() const noexcept { return flow.src_port; }
  [[nodiscard]] std::uint16_t dst_port() const noexcept { return flow.dst_port; }
};

inline FlowId reversed(const FlowId& f) noexcept {
  return FlowId{f.dst_addr, f.src_addr, f.protocol, f.dst_port, f.src_port};
}

/// Size of the serialized network + transport header of a tunnelled datagram.
inline constexpr std::uint32_t kDatagramHeaderSize = 52;

/// Serializes a packet into a datagram of exactly `p.size` bytes: a 52-byte
/// header followed by zero padding standing in for the payload.
std::vector<std::uint8_t> encode_datagram(const Packet& p);
void encode_datagram_into(const Packet& p, std::vector<std::uint8_t>& out);
/// Inverse of encode_datagram; `data` and `enqueued_at` are not carried.
Packet decode_datagram(std::span<const std::uint8_t> bytes);

}  // namespace afmt::sim
