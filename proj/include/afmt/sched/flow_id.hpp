#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace afmt::sched {

using Address = std::uint32_t;

inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

/// Transport-layer 5-tuple. Key of the AFMT flow table.
struct FlowId {
  Address src_addr = 0;
  Address dst_addr = 0;
  std::uint8_t protocol = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;

  friend constexpr bool operator==(const FlowId&, const FlowId&) = default;
  friend constexpr auto operator<=>(const FlowId&, const FlowId&) = default;
};

struct FlowIdHash {
  std::size_t operator()(const FlowId& f) const noexcept {
    std::uint64_t h = (std::uint64_t{f.src_addr} << 32) | f.dst_addr;
    std::uint64_t k = (std::uint64_t{f.protocol} << 32) | (std::uint64_t{f.src_port} << 16) | f.dst_port;
    // splitmix64 finalizer over both words
    auto mix = [](std::uint64_t x) {
      x ^= x >> 30;
      x *= 0xbf58476d1ce4e5b9ULL;
      x ^= x >> 27;
      x *= 0x94d049bb133111ebULL;
      x ^= x >> 31;
      return x;
    };
    return static_cast<std::size_t>(mix(h ^ mix(k)));
  }
};

/// Anything carrying the 5-tuple header fields.
template <class P>
concept FiveTupleHeader = requires(const P& p) {
  { p.src_addr() } -> std::convertible_to<Address>;
  { p.dst_addr() } -> std::convertible_to<Address>;
  { p.protocol() } -> std::convertible_to<std::uint8_t>;
  { p.src_port() } -> std::convertible_to<std::uint16_t>;
  { p.dst_port() } -> std::convertible_to<std::uint16_t>;
};

constexpr bool protocol_has_ports(std::uint8_t protocol) noexcept {
  return protocol == kProtoTcp || protocol == kProtoUdp;
}

/// Stand-in for OS connection tracking: a pure function of the 5-tuple.
/// Port fields are zeroed for protocols that do not carry ports.
template <FiveTupleHeader P>
constexpr FlowId flow_id_of(const P& packet) {
  FlowId id{static_cast<Address>(packet.src_addr()), static_cast<Address>(packet.dst_addr()),
            static_cast<std::uint8_t>(packet.protocol()), 0, 0};
  if (protocol_has_ports(id.protocol)) {
    id.src_port = static_cast<std::uint16_t>(packet.src_port());
    id.dst_port = static_cast<std::uint16_t>(packet.dst_port());
  }
  return id;
}

}  // namespace afmt::sched
