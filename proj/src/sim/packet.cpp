#include "afmt/sim/packet.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace afmt::sim {
namespace {

template <class T>
void put_be(std::uint8_t*& out, T v) {
  for (int i = sizeof(T) - 1; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v = static_cast<T>(v >> 8);
  }
  out += sizeof(T);
}

template <class T>
T get_be(const std::uint8_t*& in) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v = static_cast<T>((v << 8) | in[i]);
  in += sizeof(T);
  return v;
}

template <class Narrow>
Narrow checked_narrow(std::uint64_t v, const char* field) {
  if (v > std::numeric_limits<Narrow>::max()) {
    throw std::overflow_error(std::string("encode_datagram: ") + field + " does not fit the wire header");
  }
  return static_cast<Narrow>(v);
}

constexpr std::uint8_t kFlagAck = 0x1;
constexpr std::uint8_t kFlagEcr = 0x2;
constexpr std::uint8_t kFlagSyn = 0x4;

}  // namespace

void encode_datagram_into(const Packet& p, std::vector<std::uint8_t>& out) {
  if (p.size < kDatagramHeaderSize) {
    throw std::invalid_argument("encode_datagram: packet smaller than its header (" + std::to_string(p.size) + ")");
  }
  const std::size_t at = out.size();
  out.resize(at + p.size, 0);
  std::uint8_t* w = out.data() + at;
  put_be<std::uint32_t>(w, p.flow.src_addr);
  put_be<std::uint32_t>(w, p.flow.dst_addr);
  put_be<std::uint8_t>(w, p.flow.protocol);
  put_be<std::uint8_t>(w, static_cast<std::uint8_t>((p.tcp.is_ack ? kFlagAck : 0) | (p.tcp.has_ecr ? kFlagEcr : 0) |
                                                  (p.tcp.syn ? kFlagSyn : 0)));
  put_be<std::uint16_t>(w, p.flow.src_port);
  put_be<std::uint16_t>(w, p.flow.dst_port);
  put_be<std::uint32_t>(w, checked_narrow<std::uint32_t>(p.seq, "seq"));
  put_be<std::uint32_t>(w, checked_narrow<std::uint32_t>(p.tcp.seq, "tcp.seq"));
  put_be<std::uint32_t>(w, checked_narrow<std::uint32_t>(p.tcp.ack, "tcp.ack"));
  put_be<std::uint16_t>(w, checked_narrow<std::uint16_t>(p.tcp.payload_len, "tcp.payload_len"));
  put_be<std::uint64_t>(w, static_cast<std::uint64_t>(p.tcp.ts_val.count()));
  put_be<std::uint64_t>(w, static_cast<std::uint64_t>(p.tcp.ts_ecr.count()));
  put_be<std::uint64_t>(w, static_cast<std::uint64_t>(p.created_at.count()));
}

std::vector<std::uint8_t> encode_datagram(const Packet& p) {
  std::vector<std::uint8_t> out;
  encode_datagram_into(p, out);
  return out;
}

Packet decode_datagram(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kDatagramHeaderSize) {
    throw std::invalid_argument("decode_datagram: " + std::to_string(bytes.size()) + " bytes is shorter than a header");
  }
  const std::uint8_t* r = bytes.data();
  Packet p;
  p.size = static_cast<std::uint32_t>(bytes.size());
  p.flow.src_addr = get_be<std::uint32_t>(r);
  p.flow.dst_addr = get_be<std::uint32_t>(r);
  p.flow.protocol = get_be<std::uint8_t>(r);
  const auto flags = get_be<std::uint8_t>(r);
  p.flow.src_port = get_be<std::uint16_t>(r);
  p.flow.dst_port = get_be<std::uint16_t>(r);
  p.seq = get_be<std::uint32_t>(r);
  p.tcp.seq = get_be<std::uint32_t>(r);
  p.tcp.ack = get_be<std::uint32_t>(r);
  p.tcp.payload_len = get_be<std::uint16_t>(r);
  p.tcp.ts_val = SimTime{static_cast<std::int64_t>(get_be<std::uint64_t>(r))};
  p.tcp.ts_ecr = SimTime{static_cast<std::int64_t>(get_be<std::uint64_t>(r))};
  p.created_at = SimTime{static_cast<std::int64_t>(get_be<std::uint64_t>(r))};
  p.tcp.is_ack = (flags & kFlagAck) != 0;
  p.tcp.has_ecr = (flags & kFlagEcr) != 0;
  p.tcp.syn = (flags & kFlagSyn) != 0;
  return p;
}

}  // namespace afmt::sim
