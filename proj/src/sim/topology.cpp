#include "afmt/sim/topology.hpp"

#include <stdexcept>
#include <string>

namespace afmt::sim {

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::three_sub: return "three-sub";
    case Variant::two_sub: return "two-sub";
    case Variant::single_path: return "single-path";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "three-sub") return Variant::three_sub;
  if (name == "two-sub") return Variant::two_sub;
  if (name == "single-path") return Variant::single_path;
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

std::vector<std::uint64_t> uplink_rates(Variant v) {
  constexpr std::uint64_t mbit = 1'000'000;
  switch (v) {
    case Variant::three_sub: return {16 * mbit, 32 * mbit, 50 * mbit};
    case Variant::two_sub: return {32 * mbit, 50 * mbit};
    case Variant::single_path: return {50 * mbit};
  }
  throw std::invalid_argument("unknown variant");
}

Topology build_topology(Network& net, const TopologyConfig& config) {
  Topology t;
  t.variant = config.variant;
  t.tunnelled = config.variant != Variant::single_path;
  t.uplink_rates = uplink_rates(config.variant);

  const LinkConfig backbone{config.backbone_rate_bps, config.propagation_delay, config.queue_capacity};

  t.server = &net.add_node("S");
  t.tunnel_exit = &net.add_node("X");
  t.tunnel_entry = &net.add_node("E");
  for (std::size_t j = 0; j < config.n_clients; ++j) t.clients.push_back(&net.add_node("C" + std::to_string(j)));

  Node& s = *t.server;
  Node& x = *t.tunnel_exit;
  Node& e = *t.tunnel_entry;

  auto sx = net.connect(s, x, backbone);
  s.set_default_route(*sx.forward);
  x.add_route(s.address(), *sx.reverse);

  for (std::size_t i = 0; i < t.uplink_rates.size(); ++i) {
    Node& r = net.add_node("R" + std::to_string(i));
    t.routers.push_back(&r);
    const LinkConfig uplink{t.uplink_rates[i], config.propagation_delay, config.queue_capacity};
    auto xr = net.connect(x, r, backbone);
    auto re = net.connect(r, e, uplink);
    t.exit_to_router.push_back(xr.forward);
    t.router_to_exit.push_back(xr.reverse);
    t.uplink_down.push_back(re.forward);
    t.uplink_up.push_back(re.reverse);

    x.add_route(r.address(), *xr.forward);
    e.add_route(r.address(), *re.reverse);
    r.add_route(e.address(), *re.forward);
    r.set_default_route(*xr.reverse);
  }

  for (Node* c : t.clients) {
    auto ec = net.connect(e, *c, backbone);
    e.add_route(c->address(), *ec.forward);
    c->set_default_route(*ec.reverse);
    for (std::size_t i = 0; i < t.routers.size(); ++i) t.routers[i]->add_route(c->address(), *t.uplink_down[i]);
  }

  if (!t.tunnelled) {
    x.set_default_route(*t.exit_to_router.front());
    e.set_default_route(*t.uplink_up.front());
  }
  return t;
}

}  // namespace afmt::sim
