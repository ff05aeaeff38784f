#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "afmt/sim/link.hpp"
#include "afmt/sim/network.hpp"

namespace afmt::sim {

enum class Variant { three_sub, two_sub, single_path };

std::string_view to_string(Variant v) noexcept;
/// Throws std::invalid_argument on an unknown name.
Variant parse_variant(std::string_view name);

/// Uplink rates in bits/s, in subtunnel index order.
std::vector<std::uint64_t> uplink_rates(Variant v);

struct TopologyConfig {
  Variant variant = Variant::three_sub;
  std::size_t n_clients = 3;
  std::uint64_t backbone_rate_bps = 1'000'000'000;
  Nanos propagation_delay = kDefaultPropagationDelay;
  std::size_t queue_capacity = kDefaultQueueCapacity;
};

/// S -- X(tunnel exit) -- R_i -- E(tunnel entry) -- C_j, one router per uplink.
/// In the single-path variant X and E forward plainly over the 50 Mbit/s uplink.
struct Topology {
  Variant variant;
  bool tunnelled = false;
  Node* server = nullptr;
  Node* tunnel_exit = nullptr;
  Node* tunnel_entry = nullptr;
  std::vector<Node*> routers;
  std::vector<Node*> clients;
  std::vector<std::uint64_t> uplink_rates;
  std::vector<Link*> exit_to_router;  // backbone, X -> R_i
  std::vector<Link*> router_to_exit;
  std::vector<Link*> uplink_down;     // R_i -> E, the bottleneck direction for downloads
  std::vector<Link*> uplink_up;       // E -> R_i
};

Topology build_topology(Network& net, const TopologyConfig& config);

}  // namespace afmt::sim
