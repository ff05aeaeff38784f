#pragma once

// Length-prefixed datagram framing for stream subtunnels.
// Wire format: 8-byte big-endian unsigned length L, then L payload bytes.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace afmt::transport {

inline constexpr std::size_t kFrameHeaderSize = 8;

inline void put_be64(std::uint8_t* out, std::uint64_t v) noexcept {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

inline std::uint64_t get_be64(const std::uint8_t* in) noexcept {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

inline void frame_encode_into(std::span<const std::uint8_t> datagram, std::vector<std::uint8_t>& out) {
  if (datagram.size() >= (std::uint64_t{1} << 32)) {
    throw std::length_error("frame_encode: datagram too large");
  }
  const std::size_t at = out.size();
  out.resize(at + kFrameHeaderSize + datagram.size());
  put_be64(out.data() + at, datagram.size());
  std::copy(datagram.begin(), datagram.end(), out.begin() + static_cast<std::ptrdiff_t>(at + kFrameHeaderSize));
}

inline std::vector<std::uint8_t> frame_encode(std::span<const std::uint8_t> datagram) {
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + datagram.size());
  frame_encode_into(datagram, out);
  return out;
}

struct DecodeResult {
  std::vector<std::vector<std::uint8_t>> datagrams;
  std::vector<std::uint8_t> remainder;
};

/// Extracts every complete frame; partial header or payload is returned untouched.
inline DecodeResult frame_decode(std::span<const std::uint8_t> buffer) {
  DecodeResult r;
  std::size_t pos = 0;
  while (buffer.size() - pos >= kFrameHeaderSize) {
    const std::uint64_t len = get_be64(buffer.data() + pos);
    if (buffer.size() - pos - kFrameHeaderSize < len) break;
    const auto first = buffer.begin() + static_cast<std::ptrdiff_t>(pos + kFrameHeaderSize);
    r.datagrams.emplace_back(first, first + static_cast<std::ptrdiff_t>(len));
    pos += kFrameHeaderSize + len;
  }
  r.remainder.assign(buffer.begin() + static_cast<std::ptrdiff_t>(pos), buffer.end());
  return r;
}

/// Incremental decoder for a byte stream arriving in arbitrary chunks.
class FrameDecoder {
 public:
  template <class Sink>
  void feed(std::span<const std::uint8_t> chunk, Sink&& sink) {
    pending_.insert(pending_.end(), chunk.begin(), chunk.end());
    std::size_t pos = 0;
    while (pending_.size() - pos >= kFrameHeaderSize) {
      const std::uint64_t len = get_be64(pending_.data() + pos);
      if (pending_.size() - pos - kFrameHeaderSize < len) break;
      sink(std::span<const std::uint8_t>(pending_.data() + pos + kFrameHeaderSize, len));
      pos += kFrameHeaderSize + len;
    }
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(pos));
  }

  std::vector<std::vector<std::uint8_t>> feed(std::span<const std::uint8_t> chunk) {
    std::vector<std::vector<std::uint8_t>> out;
    feed(chunk, [&](std::span<const std::uint8_t> d) { out.emplace_back(d.begin(), d.end()); });
    return out;
  }

  [[nodiscard]] std::size_t buffered() const noexcept { return pending_.size(); }

 private:
  std::vector<std::uint8_t> pending_;
};

}  // namespace afmt::transport
