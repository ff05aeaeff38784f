#include "afmt/exp/tunnel.hpp"

#include <stdexcept>
#include <string>

namespace afmt::exp {

std::string_view to_string(SchedulerKind k) noexcept { return k == SchedulerKind::afmt ? "afmt" : "rr"; }

SchedulerKind parse_scheduler(std::string_view name) {
  if (name == "afmt") return SchedulerKind::afmt;
  if (name == "rr") return SchedulerKind::rr;
  throw std::invalid_argument("unknown scheduler '" + std::string(name) + "'");
}

TunnelEndpoint::TunnelEndpoint(sim::Network& net, sim::Node& local, sim::Node& peer, std::vector<sim::Link*> egress,
                               TunnelConfig config, Ports ports, std::function<bool(sim::Address)> is_remote)
    : net_(net),
      local_(local),
      egress_(std::move(egress)),
      config_(config),
      afmt_(config.flow_idle_timeout),
      counters_(egress_.size()) {
  if (egress_.empty()) throw std::invalid_argument("TunnelEndpoint: at least one subtunnel required");

  for (std::size_t i = 0; i < egress_.size(); ++i) {
    sim::Link* link = egress_[i];
    auto out = [this, link](sim::Packet&& p) { net_.send_via(local_, *link, std::move(p)); };
    const auto out_port = static_cast<std::uint16_t>(ports.out_base + i);
    const auto in_port = static_cast<std::uint16_t>(ports.in_base + i);

    if (config_.scheduler == SchedulerKind::afmt) {
      const sim::FlowId tx{local.address(), peer.address(), sched::kProtoTcp, out_port, out_port};
      const sim::FlowId rx{peer.address(), local.address(), sched::kProtoTcp, in_port, in_port};
      senders_.push_back(std::make_unique<transport::TcpSender>(net.loop(), tx, config_.subtunnel_tcp,
                                                                transport::TcpSender::Mode::buffered, out));
      decoders_.emplace_back();
      receivers_.push_back(std::make_unique<transport::TcpReceiver>(
          net.loop(), rx, config_.subtunnel_tcp, out,
          [this, i](std::span<const std::uint8_t> bytes, std::uint64_t) {
            decoders_[i].feed(bytes, [this, i](std::span<const std::uint8_t> d) { decapsulate(d, i); });
          }));
      auto* sender = senders_.back().get();
      net.loop().schedule_at(net.loop().now(), [sender] { sender->connect(); });
      auto* receiver = receivers_.back().get();
      local.bind(sched::kProtoTcp, out_port, [sender](sim::Packet&& p) { sender->on_packet(p); });
      local.bind(sched::kProtoTcp, in_port, [receiver](sim::Packet&& p) { receiver->on_packet(p); });
    } else {
      const sim::FlowId tx{local.address(), peer.address(), sched::kProtoUdp, out_port, out_port};
      sockets_.push_back(std::make_unique<transport::UdpSocket>(net.loop(), tx, out));
      local.bind(sched::kProtoUdp, in_port, [this, i](sim::Packet&& p) { decapsulate(p.data, i); });
    }
  }

  local.set_intercept([this, is_remote = std::move(is_remote)](sim::Packet& p) {
    if (!is_remote(p.flow.dst_addr)) return false;
    encapsulate(p);
    return true;
  });

  if (config_.scheduler == SchedulerKind::afmt) schedule_eviction();
}

std::vector<sched::SubtunnelStats> TunnelEndpoint::stats() const {
  std::vector<sched::SubtunnelStats> out;
  out.reserve(senders_.size());
  for (const auto& s : senders_) out.push_back(s->stats());
  return out;
}

void TunnelEndpoint::encapsulate(const sim::Packet& packet) {
  const auto now = net_.loop().now();
  std::size_t chosen = 0;
  if (config_.scheduler == SchedulerKind::afmt) {
    const auto st = stats();
    auto decision = afmt_.schedule(sched::flow_id_of(packet), packet.size, st, now);
    chosen = decision.chosen;
    if (config_.log_decisions) {
      decisions_.push_back({now, sched::flow_id_of(packet), chosen, std::move(decision.applicable)});
    }
  } else {
    chosen = sched::rr_schedule(rr_, size());
    if (config_.log_decisions) decisions_.push_back({now, sched::flow_id_of(packet), chosen, {}});
  }

  auto& c = counters_[chosen];
  ++c.datagrams;
  c.bytes += packet.size;

  if (config_.scheduler == SchedulerKind::afmt) {
    const auto datagram = sim::encode_datagram(packet);
    scratch_.clear();
    transport::frame_encode_into(datagram, scratch_);
    if (!senders_[chosen]->write(scratch_)) ++c.buffer_drops;
  } else {
    sockets_[chosen]->send(sim::encode_datagram(packet));
  }
}

void TunnelEndpoint::decapsulate(std::span<const std::uint8_t> datagram, std::size_t subtunnel) {
  ++counters_[subtunnel].decapsulated;
  net_.send(local_, sim::decode_datagram(datagram));
}

void TunnelEndpoint::schedule_eviction() {
  net_.loop().schedule_in(config_.eviction_period, [this] {
    afmt_.evict_idle(net_.loop().now());
    schedule_eviction();
  });
}

}  // namespace afmt::exp
