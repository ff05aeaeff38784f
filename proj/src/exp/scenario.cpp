#include "afmt/exp/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>

#include "afmt/sim/network.hpp"
#include "afmt/transport/tcp.hpp"

namespace afmt::exp {
namespace {

constexpr std::uint16_t kServerPortBase = 8080;
constexpr std::uint16_t kClientPortBase = 40001;
constexpr std::uint16_t kBackgroundSrcPort = 9000;
constexpr std::uint16_t kBackgroundDstPort = 9001;
constexpr std::uint16_t kExitPortBase = 5000;   // X -> E subtunnel senders
constexpr std::uint16_t kEntryPortBase = 6000;  // E -> X subtunnel senders
constexpr std::uint64_t kMbit = 1'000'000;

void write_decision_log(const std::vector<DecisionLogEntry>& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "time_ns,src_addr,dst_addr,protocol,src_port,dst_port,chosen,applicable\n";
  for (const auto& d : log) {
    out << d.at.count() << ',' << d.flow.src_addr << ',' << d.flow.dst_addr << ',' << unsigned{d.flow.protocol} << ','
        << d.flow.src_port << ',' << d.flow.dst_port << ',' << d.chosen << ',';
    for (std::size_t i = 0; i < d.applicable.size(); ++i) out << (i ? ";" : "") << d.applicable[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

bool within(const Window& w, Nanos duration) {
  return w.start >= Nanos::zero() && w.start <= w.stop && w.stop <= duration;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (sim_duration <= Nanos::zero() || sim_duration % std::chrono::seconds(1) != Nanos::zero()) {
    throw std::invalid_argument("sim_duration must be a positive whole number of seconds");
  }
  if (!within(payload, sim_duration)) throw std::invalid_argument("payload window must lie within [0, sim_duration]");
  if (!within(background, sim_duration)) {
    throw std::invalid_argument("background window must lie within [0, sim_duration]");
  }
  if (n_flows == 0) throw std::invalid_argument("at least one payload flow is required");
  if (start_jitter < Nanos::zero()) throw std::invalid_argument("start_jitter must be non-negative");
  if (queue_capacity == 0) throw std::invalid_argument("queue_capacity must be >= 1");
  if (payload_receive_window < transport::kMss || subtunnel_receive_window < transport::kMss) {
    throw std::invalid_argument("receive windows must hold at least one segment");
  }
  if (subtunnel_send_buffer < transport::kMss + transport::kFrameHeaderSize) {
    throw std::invalid_argument("subtunnel_send_buffer must hold at least one framed datagram");
  }
}

MetricsRecord run_scenario(const ScenarioConfig& config) {
  config.validate();

  sim::EventLoop loop;
  sim::Network net(loop);
  sim::TopologyConfig tcfg;
  tcfg.variant = config.variant;
  tcfg.n_clients = config.n_flows;
  tcfg.queue_capacity = config.queue_capacity;
  const sim::Topology topo = sim::build_topology(net, tcfg);

  const std::size_t n_bins = static_cast<std::size_t>(std::chrono::duration_cast<std::chrono::seconds>(config.sim_duration).count());
  MetricsRecord m;
  m.variant = std::string(sim::to_string(config.variant));
  m.scheduler = topo.tunnelled ? std::string(to_string(config.scheduler)) : "none";
  m.seed = config.seed;
  m.flow_bins.assign(config.n_flows, std::vector<std::uint64_t>(n_bins, 0));
  m.total_bins.assign(n_bins, 0);

  // tunnel endpoints
  std::unique_ptr<TunnelEndpoint> exit_side;
  std::unique_ptr<TunnelEndpoint> entry_side;
  if (topo.tunnelled) {
    TunnelConfig tc;
    tc.scheduler = config.scheduler;
    tc.subtunnel_tcp.delayed_ack_timeout = transport::kSubtunnelDelayedAck;
    tc.subtunnel_tcp.send_buffer = config.subtunnel_send_buffer;
    tc.subtunnel_tcp.receive_window = config.subtunnel_receive_window;
    tc.log_decisions = !config.decision_log_path.empty();

    std::vector<sim::Address> client_addrs;
    for (auto* c : topo.clients) client_addrs.push_back(c->address());
    const sim::Address server_addr = topo.server->address();

    exit_side = std::make_unique<TunnelEndpoint>(
        net, *topo.tunnel_exit, *topo.tunnel_entry, topo.exit_to_router, tc,
        TunnelEndpoint::Ports{kExitPortBase, kEntryPortBase}, [client_addrs](sim::Address a) {
          return std::find(client_addrs.begin(), client_addrs.end(), a) != client_addrs.end();
        });
    entry_side = std::make_unique<TunnelEndpoint>(
        net, *topo.tunnel_entry, *topo.tunnel_exit, topo.uplink_up, tc,
        TunnelEndpoint::Ports{kEntryPortBase, kExitPortBase}, [server_addr](sim::Address a) { return a == server_addr; });
  }

  // payload: bulk downloads S -> C_j
  transport::TcpConfig payload_tcp;
  payload_tcp.receive_window = config.payload_receive_window;
  payload_tcp.delayed_ack_timeout = transport::kPayloadDelayedAck;

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<Nanos::rep> jitter(0, config.start_jitter.count());

  std::vector<std::unique_ptr<transport::TcpSender>> senders;
  std::vector<std::unique_ptr<transport::TcpReceiver>> receivers;
  sim::Node& server = *topo.server;
  for (std::size_t j = 0; j < config.n_flows; ++j) {
    sim::Node& client = *topo.clients[j];
    const sim::FlowId flow{server.address(), client.address(), sched::kProtoTcp,
                           static_cast<std::uint16_t>(kServerPortBase + j),
                           static_cast<std::uint16_t>(kClientPortBase + j)};
    senders.push_back(std::make_unique<transport::TcpSender>(
        loop, flow, payload_tcp, transport::TcpSender::Mode::bulk,
        [&net, &server](sim::Packet&& p) { net.send(server, std::move(p)); }));
    receivers.push_back(std::make_unique<transport::TcpReceiver>(
        loop, flow, payload_tcp, [&net, &client](sim::Packet&& p) { net.send(client, std::move(p)); },
        [&m, &loop, j, n_bins](std::span<const std::uint8_t>, std::uint64_t len) {
          const auto bin = std::min(n_bins - 1, static_cast<std::size_t>(loop.now() / std::chrono::seconds(1)));
          m.flow_bins[j][bin] += len;
          m.total_bins[bin] += len;
        }));
    auto* snd = senders.back().get();
    auto* rcv = receivers.back().get();
    server.bind(sched::kProtoTcp, flow.src_port, [snd](sim::Packet&& p) { snd->on_packet(p); });
    client.bind(sched::kProtoTcp, flow.dst_port, [rcv](sim::Packet&& p) { rcv->on_packet(p); });

    const Nanos start = config.payload.start + Nanos{jitter(rng)};
    loop.schedule_at(start, [snd] {
      snd->connect();
      snd->start_bulk();
    });
    loop.schedule_at(config.payload.stop, [snd] { snd->stop_bulk(); });
  }

  // background: plain bulk TCP over the 32 Mbit/s uplink, router -> tunnel entry
  std::unique_ptr<transport::TcpSender> bg_sender;
  std::unique_ptr<transport::TcpReceiver> bg_receiver;
  const auto rate_it = std::find(topo.uplink_rates.begin(), topo.uplink_rates.end(), 32 * kMbit);
  if (rate_it != topo.uplink_rates.end()) {
    sim::Node& src = *topo.routers[static_cast<std::size_t>(rate_it - topo.uplink_rates.begin())];
    sim::Node& dst = *topo.tunnel_entry;
    const sim::FlowId flow{src.address(), dst.address(), sched::kProtoTcp, kBackgroundSrcPort, kBackgroundDstPort};
    bg_sender = std::make_unique<transport::TcpSender>(loop, flow, payload_tcp, transport::TcpSender::Mode::bulk,
                                                       [&net, &src](sim::Packet&& p) { net.send(src, std::move(p)); });
    bg_receiver = std::make_unique<transport::TcpReceiver>(
        loop, flow, payload_tcp, [&net, &dst](sim::Packet&& p) { net.send(dst, std::move(p)); },
        [&m](std::span<const std::uint8_t>, std::uint64_t len) { m.background_delivered += len; });
    auto* snd = bg_sender.get();
    auto* rcv = bg_receiver.get();
    src.bind(sched::kProtoTcp, kBackgroundSrcPort, [snd](sim::Packet&& p) { snd->on_packet(p); });
    dst.bind(sched::kProtoTcp, kBackgroundDstPort, [rcv](sim::Packet&& p) { rcv->on_packet(p); });
    loop.schedule_at(config.background.start, [snd] {
      snd->connect();
      snd->start_bulk();
    });
    loop.schedule_at(config.background.stop, [snd] { snd->stop_bulk(); });
  }

  // every event strictly before the end of the last bin
  loop.run_until(config.sim_duration - Nanos{1});

  for (std::size_t j = 0; j < config.n_flows; ++j) {
    m.flow_delivered.push_back(receivers[j]->counters().bytes_delivered);
    m.flow_injected.push_back(senders[j]->highest_sent());
    m.flow_reordered.push_back(receivers[j]->counters().reordered);
    m.flow_retransmits.push_back(senders[j]->counters().retransmits);
    m.flow_timeouts.push_back(senders[j]->counters().timeouts);
  }
  if (exit_side) {
    for (const auto& c : exit_side->counters()) {
      m.subtunnel_bytes.push_back(c.bytes);
      m.subtunnel_buffer_drops.push_back(c.buffer_drops);
    }
  } else {
    m.subtunnel_bytes.assign(1, topo.uplink_down.front()->counters().bytes_delivered);
    m.subtunnel_buffer_drops.assign(1, 0);
  }
  for (const auto& link : net.links()) m.queue_drops.emplace_back(link->name(), link->counters().dropped);

  m.packets_injected = net.counters().injected;
  m.packets_delivered = net.counters().delivered;
  m.packets_dropped = net.dropped();
  m.packets_in_flight = net.in_flight();
  m.events_executed = loop.executed();

  if (!config.output_path.empty()) write_csv(m, config.output_path);
  if (exit_side && !config.decision_log_path.empty()) write_decision_log(exit_side->decisions(), config.decision_log_path);
  return m;
}

}  // namespace afmt::exp
