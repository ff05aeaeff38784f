#include "afmt/transport/tcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace afmt::transport {
namespace {

// "Unlimited" bulk data, far beyond anything a run can send.
constexpr std::uint64_t kBulkDataEnd = std::uint64_t{1} << 62;
constexpr std::uint32_t kMaxBackoff = 64;

}  // namespace

TcpSender::TcpSender(EventLoop& loop, FlowId flow, TcpConfig config, Mode mode, Egress egress)
    : loop_(loop),
      flow_(flow),
      config_(config),
      mode_(mode),
      egress_(std::move(egress)),
      rto_timer_(loop),
      cc_(CongestionState::initial(config.mss, config.initial_cwnd_segments)) {
  if (config_.mss == 0) throw std::invalid_argument("TcpSender: mss must be positive");
}

void TcpSender::connect() {
  established_ = false;
  send_syn();
  restart_rto();
}

void TcpSender::send_syn() {
  Packet p;
  p.flow = flow_;
  p.size = config_.header_bytes;
  p.seq = next_packet_seq_++;
  p.created_at = loop_.now();
  p.tcp.syn = true;
  p.tcp.seq = snd_una_;
  p.tcp.ts_val = loop_.now();
  ++counters_.segments_sent;
  egress_(std::move(p));
}

void TcpSender::start_bulk() {
  if (mode_ != Mode::bulk) throw std::logic_error("TcpSender::start_bulk on a buffered sender");
  bulk_running_ = true;
  data_end_ = kBulkDataEnd;
  try_send();
}

void TcpSender::stop_bulk() {
  if (mode_ != Mode::bulk) throw std::logic_error("TcpSender::stop_bulk on a buffered sender");
  bulk_running_ = false;
  data_end_ = snd_max_;
}

std::uint64_t TcpSender::writable() const noexcept {
  const std::uint64_t used = fill();
  return used >= config_.send_buffer ? 0 : config_.send_buffer - used;
}

bool TcpSender::write(std::span<const std::uint8_t> bytes) {
  if (mode_ != Mode::buffered) throw std::logic_error("TcpSender::write on a bulk sender");
  if (bytes.size() > writable()) return false;
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  data_end_ += bytes.size();
  try_send();
  return true;
}

sched::SubtunnelStats TcpSender::stats() const {
  sched::SubtunnelStats s;
  s.srtt = rtt_.has_sample ? Nanos{std::max<Nanos::rep>(1, std::llround(rtt_.srtt.count()))} : kInitialSrtt;
  s.cwnd = cc_.cwnd;
  s.fill = fill();
  return s;
}

std::uint64_t TcpSender::window() const noexcept { return std::min(cc_.cwnd, config_.receive_window); }

void TcpSender::try_send() {
  if (!established_) return;
  while (snd_nxt_ < data_end_) {
    const auto len = static_cast<std::uint32_t>(std::min<std::uint64_t>(config_.mss, data_end_ - snd_nxt_));
    if (in_flight() + len > window()) break;
    send_segment(snd_nxt_, len);
    snd_nxt_ += len;
    snd_max_ = std::max(snd_max_, snd_nxt_);
  }
  if (in_flight() > 0 && !rto_timer_.armed()) restart_rto();
}

void TcpSender::send_segment(std::uint64_t seq, std::uint32_t len) {
  Packet p;
  p.flow = flow_;
  p.size = config_.header_bytes + len;
  p.seq = next_packet_seq_++;
  p.created_at = loop_.now();
  p.tcp.seq = seq;
  p.tcp.payload_len = len;
  p.tcp.ts_val = loop_.now();
  if (mode_ == Mode::buffered) {
    const auto first = buffer_.begin() + static_cast<std::ptrdiff_t>(seq - snd_una_);
    p.data.assign(first, first + len);
  }
  ++counters_.segments_sent;
  if (seq < snd_max_) ++counters_.retransmits;
  egress_(std::move(p));
}

void TcpSender::retransmit_head() {
  const std::uint64_t outstanding = snd_max_ - snd_una_;
  if (outstanding == 0) return;
  send_segment(snd_una_, static_cast<std::uint32_t>(std::min<std::uint64_t>(config_.mss, outstanding)));
  snd_nxt_ = std::max(snd_nxt_, snd_una_ + std::min<std::uint64_t>(config_.mss, outstanding));
}

void TcpSender::restart_rto() {
  const auto base = Nanos{static_cast<Nanos::rep>(std::ceil(rtt_.rto.count()))};
  const Nanos rto = std::min(config_.max_rto, base * backoff_);
  rto_timer_.arm(loop_.now() + rto, [this] { on_rto(); });
}

void TcpSender::on_packet(const Packet& packet) {
  if (!packet.tcp.is_ack) return;
  if (packet.tcp.syn) {
    if (established_) return;
    established_ = true;
    backoff_ = 1;
    rto_timer_.cancel();
    if (packet.tcp.has_ecr && loop_.now() > packet.tcp.ts_ecr) {
      srtt_update(rtt_, loop_.now() - packet.tcp.ts_ecr);
      ++counters_.rtt_samples;
    }
    try_send();
    return;
  }
  const std::uint64_t ack = packet.tcp.ack;
  if (ack > snd_max_) return;

  if (ack > snd_una_) {
    const std::uint64_t acked = ack - snd_una_;
    if (packet.tcp.has_ecr) {
      const Nanos sample = loop_.now() - packet.tcp.ts_ecr;
      if (sample > Nanos::zero()) {
        srtt_update(rtt_, sample);
        ++counters_.rtt_samples;
      }
    }
    if (mode_ == Mode::buffered) {
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(acked));
    }
    snd_una_ = ack;
    snd_nxt_ = std::max(snd_nxt_, snd_una_);
    backoff_ = 1;

    if (cc_.phase == CcPhase::fast_recovery) {
      if (ack >= recover_) {
        on_recovery_exit(cc_);
      } else {
        // partial ACK: the next hole is lost too
        ++counters_.fast_retransmits;
        retransmit_head();
        cc_.cwnd = std::max<std::uint64_t>(config_.mss, (cc_.cwnd > acked ? cc_.cwnd - acked : 0) + config_.mss);
        cc_.dup_acks = 0;
      }
    } else {
      on_ack(cc_, acked, config_.mss);
    }

    if (in_flight() > 0) {
      restart_rto();
    } else {
      rto_timer_.cancel();
    }
    try_send();
    return;
  }

  if (ack == snd_una_ && in_flight() > 0 && packet.tcp.payload_len == 0) {
    const bool may_recover = cc_.phase == CcPhase::fast_recovery || !recover_valid_ || ack > recover_;
    if (!may_recover) {
      ++cc_.dup_acks;
      return;
    }
    if (on_dup_ack(cc_, config_.mss) == DupAckAction::fast_retransmit) {
      recover_ = snd_max_;
      recover_valid_ = true;
      ++counters_.fast_retransmits;
      retransmit_head();
      restart_rto();
    }
    try_send();
  }
}

void TcpSender::on_rto() {
  if (!established_) {
    backoff_ = std::min(backoff_ * 2, kMaxBackoff);
    send_syn();
    restart_rto();
    return;
  }
  if (snd_max_ == snd_una_) return;
  ++counters_.timeouts;
  on_timeout(cc_, config_.mss);
  recover_ = snd_max_;
  recover_valid_ = true;
  snd_nxt_ = snd_una_;
  backoff_ = std::min(backoff_ * 2, kMaxBackoff);
  try_send();
  restart_rto();
}

TcpReceiver::TcpReceiver(EventLoop& loop, FlowId flow, TcpConfig config, Egress egress, Sink sink)
    : loop_(loop),
      flow_(flow),
      config_(config),
      egress_(std::move(egress)),
      sink_(std::move(sink)),
      delack_timer_(loop) {}

void TcpReceiver::on_packet(const Packet& packet) {
  if (packet.tcp.is_ack && packet.tcp.payload_len == 0) return;
  if (packet.tcp.syn) {
    Packet a;
    a.flow = sim::reversed(flow_);
    a.size = config_.header_bytes;
    a.seq = next_packet_seq_++;
    a.created_at = loop_.now();
    a.tcp.is_ack = true;
    a.tcp.syn = true;
    a.tcp.ack = rcv_nxt_;
    a.tcp.ts_val = loop_.now();
    a.tcp.has_ecr = true;
    a.tcp.ts_ecr = packet.tcp.ts_val;
    ++counters_.acks_sent;
    egress_(std::move(a));
    return;
  }
  ++counters_.segments;

  if (any_seen_ && packet.seq < max_packet_seq_) {
    ++counters_.reordered;
  } else {
    max_packet_seq_ = packet.seq;
    any_seen_ = true;
  }

  const std::uint64_t seq = packet.tcp.seq;
  const std::uint64_t end = seq + packet.tcp.payload_len;
  if (seq <= last_ack_sent_ && (!has_ts_recent_ || packet.tcp.ts_val >= ts_recent_)) {
    ts_recent_ = packet.tcp.ts_val;
    has_ts_recent_ = true;
  }

  bool immediate = false;
  if (end <= rcv_nxt_) {
    ++counters_.duplicates;
    immediate = true;
  } else if (seq > rcv_nxt_) {
    ++counters_.out_of_order;
    auto it = ooo_.find(seq);
    if (it == ooo_.end() || it->second.end < end) ooo_[seq] = Segment{end, packet.data};
    immediate = true;
  } else {
    const bool filled_hole = !ooo_.empty();
    deliver(seq, end, packet.data);
    while (!ooo_.empty() && ooo_.begin()->first <= rcv_nxt_) {
      auto node = ooo_.extract(ooo_.begin());
      if (node.mapped().end > rcv_nxt_) deliver(node.key(), node.mapped().end, node.mapped().data);
    }
    if (filled_hole) {
      immediate = true;
    } else if (++unacked_segments_ >= config_.ack_every_segments) {
      immediate = true;
    }
  }

  if (immediate) {
    send_ack();
  } else if (!delack_timer_.armed()) {
    delack_timer_.arm(loop_.now() + config_.delayed_ack_timeout, [this] {
      if (unacked_segments_ > 0) send_ack();
    });
  }
}

void TcpReceiver::deliver(std::uint64_t seq, std::uint64_t end, std::span<const std::uint8_t> data) {
  const std::uint64_t skip = rcv_nxt_ - seq;
  const std::uint64_t len = end - rcv_nxt_;
  sink_(data.empty() ? data : data.subspan(skip, len), len);
  rcv_nxt_ = end;
  counters_.bytes_delivered += len;
}

void TcpReceiver::send_ack() {
  Packet a;
  a.flow = sim::reversed(flow_);
  a.size = config_.header_bytes;
  a.seq = next_packet_seq_++;
  a.created_at = loop_.now();
  a.tcp.is_ack = true;
  a.tcp.ack = rcv_nxt_;
  a.tcp.ts_val = loop_.now();
  a.tcp.has_ecr = has_ts_recent_;
  a.tcp.ts_ecr = ts_recent_;
  last_ack_sent_ = rcv_nxt_;
  unacked_segments_ = 0;
  delack_timer_.cancel();
  ++counters_.acks_sent;
  egress_(std::move(a));
}

}  // namespace afmt::transport
