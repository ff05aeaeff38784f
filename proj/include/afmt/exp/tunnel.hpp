#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "afmt/sched/afmt.hpp"
#include "afmt/sched/round_robin.hpp"
#include "afmt/sim/network.hpp"
#include "afmt/transport/framing.hpp"
#include "afmt/transport/tcp.hpp"
#include "afmt/transport/udp.hpp"

namespace afmt::exp {

enum class SchedulerKind { afmt, rr };

std::string_view to_string(SchedulerKind k) noexcept;
SchedulerKind parse_scheduler(std::string_view name);

struct DecisionLogEntry {
  sim::SimTime at;
  sched::FlowId flow;
  std::size_t chosen;
  std::vector<std::size_t> applicable;
};

struct SubtunnelCounters {
  std::uint64_t datagrams = 0;
  std::uint64_t bytes = 0;            // inner datagram bytes handed to the subtunnel
  std::uint64_t buffer_drops = 0;     // rejected because the send buffer was full
  std::uint64_t decapsulated = 0;
};

struct TunnelConfig {
  SchedulerKind scheduler = SchedulerKind::afmt;
  transport::TcpConfig subtunnel_tcp;  // afmt: stream subtunnels
  sched::Nanos flow_idle_timeout = sched::kDefaultFlowIdleTimeout;
  sched::Nanos eviction_period = std::chrono::seconds(1);
  bool log_decisions = false;
};

/// One side of a multipath tunnel. Packets that reach `local` addressed to
/// the far side are scheduled onto a subtunnel; packets arriving over a
/// subtunnel are decapsulated and forwarded from `local`.
///
/// AFMT uses framed TCP byte streams per subtunnel, round robin uses UDP.
class TunnelEndpoint {
 public:
  struct Ports {
    std::uint16_t out_base;  // our senders' ports, subtunnel i -> out_base + i
    std::uint16_t in_base;   // peer senders' ports
  };

  TunnelEndpoint(sim::Network& net, sim::Node& local, sim::Node& peer, std::vector<sim::Link*> egress,
                 TunnelConfig config, Ports ports, std::function<bool(sim::Address)> is_remote);
  TunnelEndpoint(const TunnelEndpoint&) = delete;
  TunnelEndpoint& operator=(const TunnelEndpoint&) = delete;

  [[nodiscard]] std::size_t size() const noexcept { return egress_.size(); }
  [[nodiscard]] std::vector<sched::SubtunnelStats> stats() const;
  [[nodiscard]] const std::vector<SubtunnelCounters>& counters() const noexcept { return counters_; }
  [[nodiscard]] const std::vector<DecisionLogEntry>& decisions() const noexcept { return decisions_; }
  [[nodiscard]] const sched::AfmtScheduler& afmt() const noexcept { return afmt_; }
  [[nodiscard]] const transport::TcpSender* stream(std::size_t i) const {
    return i < senders_.size() ? senders_[i].get() : nullptr;
  }

 private:
  void encapsulate(const sim::Packet& packet);
  void decapsulate(std::span<const std::uint8_t> datagram, std::size_t subtunnel);
  void schedule_eviction();

  sim::Network& net_;
  sim::Node& local_;
  std::vector<sim::Link*> egress_;
  TunnelConfig config_;

  sched::AfmtScheduler afmt_;
  sched::RoundRobinCursor rr_;
  std::vector<std::unique_ptr<transport::TcpSender>> senders_;
  std::vector<std::unique_ptr<transport::TcpReceiver>> receivers_;
  std::vector<transport::FrameDecoder> decoders_;
  std::vector<std::unique_ptr<transport::UdpSocket>> sockets_;
  std::vector<SubtunnelCounters> counters_;
  std::vector<DecisionLogEntry> decisions_;
  std::vector<std::uint8_t> scratch_;
};

}  // namespace afmt::exp
