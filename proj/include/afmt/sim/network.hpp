#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "afmt/sim/event_loop.hpp"
#include "afmt/sim/link.hpp"
#include "afmt/sim/packet.hpp"

namespace afmt::sim {

class Network;

/// Host or router. Packets addressed to the node are demultiplexed by
/// (protocol, destination port); everything else is forwarded by static route
/// unless an intercept hook claims it first.
class Node {
 public:
  using Handler = std::function<void(Packet&&)>;
  /// Returns true when the packet was consumed.
  using Intercept = std::function<bool(Packet&)>;

  Node(Network& net, std::string name, Address addr) : net_(&net), name_(std::move(name)), addr_(addr) {}

  [[nodiscard]] Address address() const noexcept { return addr_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  void add_route(Address dst, Link& via) { routes_[dst] = &via; }
  void set_default_route(Link& via) { default_route_ = &via; }
  [[nodiscard]] Link* route(Address dst) const;

  void bind(std::uint8_t protocol, std::uint16_t port, Handler handler);
  void set_intercept(Intercept hook) { intercept_ = std::move(hook); }

 private:
  friend class Network;

  Network* net_;
  std::string name_;
  Address addr_;
  std::unordered_map<Address, Link*> routes_;
  Link* default_route_ = nullptr;
  std::map<std::pair<std::uint8_t, std::uint16_t>, Handler> handlers_;
  Intercept intercept_;
};

struct NetworkCounters {
  std::uint64_t injected = 0;   // handed in by local agents
  std::uint64_t delivered = 0;  // consumed by a local handler or intercept
  std::uint64_t unclaimed = 0;  // addressed to a node with no matching handler
};

class Network {
 public:
  struct Duplex {
    Link* forward;  // a -> b
    Link* reverse;  // b -> a
  };

  explicit Network(EventLoop& loop) : loop_(loop) {}
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  EventLoop& loop() noexcept { return loop_; }

  Node& add_node(std::string name);
  Duplex connect(Node& a, Node& b, const LinkConfig& config);

  /// Originates a packet at `from`, routed by destination.
  void send(Node& from, Packet packet);
  /// Originates a packet at `from` on an explicit outgoing link.
  void send_via(Node& from, Link& link, Packet packet);

  [[nodiscard]] const NetworkCounters& counters() const noexcept { return counters_; }
  [[nodiscard]] std::uint64_t dropped() const;
  [[nodiscard]] std::uint64_t in_flight() const;
  [[nodiscard]] const std::vector<std::unique_ptr<Link>>& links() const noexcept { return links_; }
  [[nodiscard]] const std::vector<std::unique_ptr<Node>>& nodes() const noexcept { return nodes_; }

 private:
  void receive(Node& at, Packet&& packet);
  void forward(Node& at, Packet&& packet);

  EventLoop& loop_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<std::unique_ptr<Link>> links_;
  NetworkCounters counters_;
};

}  // namespace afmt::sim
