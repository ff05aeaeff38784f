#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace afmt::transport {

enum class CcPhase { slow_start, congestion_avoidance, fast_recovery };
enum class DupAckAction { none, fast_retransmit };

inline constexpr std::uint64_t kSsthreshUnset = std::numeric_limits<std::uint64_t>::max();
inline constexpr std::uint32_t kDupAckThreshold = 3;

/// NewReno-style window state. All sizes in bytes.
struct CongestionState {
  std::uint64_t cwnd = 0;
  std::uint64_t ssthresh = kSsthreshUnset;
  CcPhase phase = CcPhase::slow_start;
  std::uint32_t dup_acks = 0;

  static CongestionState initial(std::uint64_t mss, std::uint64_t initial_segments = 10) {
    return CongestionState{mss * initial_segments, kSsthreshUnset, CcPhase::slow_start, 0};
  }
};

/// New cumulative ACK outside fast recovery.
inline void on_ack(CongestionState& cs, std::uint64_t acked_bytes, std::uint64_t mss) {
  if (acked_bytes == 0) throw std::invalid_argument("on_ack: acked_bytes must be positive");
  cs.dup_acks = 0;
  switch (cs.phase) {
    case CcPhase::slow_start:
      cs.cwnd += std::min(acked_bytes, mss);
      if (cs.cwnd >= cs.ssthresh) cs.phase = CcPhase::congestion_avoidance;
      break;
    case CcPhase::congestion_avoidance:
      cs.cwnd += std::max<std::uint64_t>(1, mss * mss / cs.cwnd);
      break;
    case CcPhase::fast_recovery:
      // recovery exit is driven by the sender (full vs partial ACK)
      break;
  }
}

/// Duplicate ACK. The third one halves the window and enters fast recovery;
/// further duplicates during recovery inflate cwnd by one segment each.
inline DupAckAction on_dup_ack(CongestionState& cs, std::uint64_t mss) {
  ++cs.dup_acks;
  if (cs.phase == CcPhase::fast_recovery) {
    cs.cwnd += mss;
    return DupAckAction::none;
  }
  if (cs.dup_acks == kDupAckThreshold) {
    cs.ssthresh = std::max(cs.cwnd / 2, 2 * mss);
    cs.cwnd = cs.ssthresh;
    cs.phase = CcPhase::fast_recovery;
    return DupAckAction::fast_retransmit;
  }
  return DupAckAction::none;
}

/// Full ACK ending fast recovery.
inline void on_recovery_exit(CongestionState& cs) {
  cs.cwnd = cs.ssthresh;
  cs.phase = CcPhase::congestion_avoidance;
  cs.dup_acks = 0;
}

inline void on_timeout(CongestionState& cs, std::uint64_t mss) {
  cs.ssthresh = std::max(cs.cwnd / 2, 2 * mss);
  cs.cwnd = mss;
  cs.phase = CcPhase::slow_start;
  cs.dup_acks = 0;
}

}  // namespace afmt::transport
