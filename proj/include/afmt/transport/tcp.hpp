#pragma once

// Simplified NewReno TCP: slow start, congestion avoidance, fast
// retransmit/recovery with partial ACKs, RTO with go-back-N, delayed ACKs and
// the timestamp option for RTT sampling. No SACK, no window scaling; the
// receive window is a fixed advertised value.

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "afmt/sched/afmt.hpp"
#include "afmt/sim/event_loop.hpp"
#include "afmt/sim/packet.hpp"
#include "afmt/transport/congestion.hpp"
#include "afmt/transport/rtt_estimator.hpp"

namespace afmt::transport {

using sim::EventLoop;
using sim::FlowId;
using sim::Packet;
using sim::SimTime;

inline constexpr std::uint32_t kMss = 1448;
inline constexpr std::uint32_t kTcpHeaderBytes = 52;
inline constexpr Nanos kSubtunnelDelayedAck = std::chrono::milliseconds(40);
inline constexpr Nanos kPayloadDelayedAck = std::chrono::milliseconds(200);
/// Stats reported for a subtunnel before it has produced an RTT sample.
inline constexpr Nanos kInitialSrtt = std::chrono::milliseconds(100);

struct TcpConfig {
  std::uint32_t mss = kMss;
  std::uint32_t header_bytes = kTcpHeaderBytes;
  std::uint32_t initial_cwnd_segments = 10;
  std::uint64_t receive_window = 131072;
  std::uint64_t send_buffer = 131072;  // buffered senders only
  Nanos delayed_ack_timeout = kPayloadDelayedAck;
  std::uint32_t ack_every_segments = 2;
  Nanos max_rto = std::chrono::seconds(60);
};

using Egress = std::function<void(Packet&&)>;

struct TcpSenderCounters {
  std::uint64_t segments_sent = 0;
  std::uint64_t retransmits = 0;
  std::uint64_t fast_retransmits = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t rtt_samples = 0;
};

class TcpSender {
 public:
  /// bulk: unlimited application data while running (bulk-send app).
  /// buffered: data written through write() into a bounded send buffer.
  enum class Mode { bulk, buffered };

  TcpSender(EventLoop& loop, FlowId flow, TcpConfig config, Mode mode, Egress egress);
  TcpSender(const TcpSender&) = delete;
  TcpSender& operator=(const TcpSender&) = delete;

  /// Sends a SYN; data waits until the SYN-ACK arrives, which also yields
  /// the first RTT sample. Senders that never call connect() start open.
  void connect();
  [[nodiscard]] bool established() const noexcept { return established_; }

  void start_bulk();
  /// No new data after this point; outstanding data is still recovered.
  void stop_bulk();

  /// All-or-nothing append; false when the send buffer lacks room.
  bool write(std::span<const std::uint8_t> bytes);
  [[nodiscard]] std::uint64_t writable() const noexcept;

  /// Inbound ACK for this connection.
  void on_packet(const Packet& packet);

  [[nodiscard]] const FlowId& flow() const noexcept { return flow_; }
  [[nodiscard]] const CongestionState& congestion() const noexcept { return cc_; }
  [[nodiscard]] const RttEstimator& rtt() const noexcept { return rtt_; }
  [[nodiscard]] const TcpSenderCounters& counters() const noexcept { return counters_; }
  /// Bytes written but not yet acknowledged (buffered + in flight).
  [[nodiscard]] std::uint64_t fill() const noexcept { return data_end_ - snd_una_; }
  [[nodiscard]] std::uint64_t in_flight() const noexcept { return snd_nxt_ - snd_una_; }
  [[nodiscard]] std::uint64_t highest_sent() const noexcept { return snd_max_; }
  [[nodiscard]] std::uint64_t acked() const noexcept { return snd_una_; }
  /// Scheduler view: srtt (100 ms until sampled), cwnd and fill.
  [[nodiscard]] sched::SubtunnelStats stats() const;

 private:
  void try_send();
  void send_segment(std::uint64_t seq, std::uint32_t len);
  void send_syn();
  void retransmit_head();
  void restart_rto();
  void on_rto();
  [[nodiscard]] std::uint64_t window() const noexcept;

  EventLoop& loop_;
  FlowId flow_;
  TcpConfig config_;
  Mode mode_;
  Egress egress_;
  sim::Timer rto_timer_;

  CongestionState cc_;
  RttEstimator rtt_;
  std::uint32_t backoff_ = 1;
  std::uint64_t snd_una_ = 0;
  std::uint64_t snd_nxt_ = 0;
  std::uint64_t snd_max_ = 0;
  std::uint64_t recover_ = 0;
  bool recover_valid_ = false;
  std::uint64_t data_end_ = 0;
  bool bulk_running_ = false;
  bool established_ = true;
  std::deque<std::uint8_t> buffer_;  // bytes [snd_una_, data_end_) in buffered mode
  std::uint64_t next_packet_seq_ = 0;
  TcpSenderCounters counters_;
};

struct TcpReceiverCounters {
  std::uint64_t segments = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t out_of_order = 0;
  std::uint64_t reordered = 0;  // arrivals whose packet seq is below the highest seen
  std::uint64_t acks_sent = 0;
  std::uint64_t bytes_delivered = 0;
};

class TcpReceiver {
 public:
  /// In-order data handed to the application. `bytes` is empty for bulk
  /// flows that carry no real payload; `len` is always the byte count.
  using Sink = std::function<void(std::span<const std::uint8_t> bytes, std::uint64_t len)>;

  /// `flow` is the data direction; ACKs go out on its reverse.
  TcpReceiver(EventLoop& loop, FlowId flow, TcpConfig config, Egress egress, Sink sink);
  TcpReceiver(const TcpReceiver&) = delete;
  TcpReceiver& operator=(const TcpReceiver&) = delete;

  void on_packet(const Packet& packet);

  [[nodiscard]] const TcpReceiverCounters& counters() const noexcept { return counters_; }
  [[nodiscard]] std::uint64_t rcv_nxt() const noexcept { return rcv_nxt_; }

 private:
  struct Segment {
    std::uint64_t end;
    std::vector<std::uint8_t> data;
  };

  void deliver(std::uint64_t seq, std::uint64_t end, std::span<const std::uint8_t> data);
  void send_ack();

  EventLoop& loop_;
  FlowId flow_;
  TcpConfig config_;
  Egress egress_;
  Sink sink_;
  sim::Timer delack_timer_;

  std::uint64_t rcv_nxt_ = 0;
  std::uint64_t last_ack_sent_ = 0;
  std::uint32_t unacked_segments_ = 0;
  SimTime ts_recent_{0};
  bool has_ts_recent_ = false;
  bool any_seen_ = false;
  std::uint64_t max_packet_seq_ = 0;
  std::uint64_t next_packet_seq_ = 0;
  std::map<std::uint64_t, Segment> ooo_;
  TcpReceiverCounters counters_;
};

}  // namespace afmt::transport
