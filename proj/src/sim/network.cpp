#include "afmt/sim/network.hpp"

#include <stdexcept>

namespace afmt::sim {

Link* Node::route(Address dst) const {
  if (auto it = routes_.find(dst); it != routes_.end()) return it->second;
  return default_route_;
}

void Node::bind(std::uint8_t protocol, std::uint16_t port, Handler handler) {
  auto [it, inserted] = handlers_.try_emplace({protocol, port}, std::move(handler));
  if (!inserted) {
    throw std::logic_error("Node " + name_ + ": port " + std::to_string(port) + " already bound");
  }
}

Node& Network::add_node(std::string name) {
  // 10.0.0.0/16, one address per node
  const Address addr = 0x0A000000u + static_cast<Address>(nodes_.size()) + 1;
  nodes_.push_back(std::make_unique<Node>(*this, std::move(name), addr));
  return *nodes_.back();
}

Network::Duplex Network::connect(Node& a, Node& b, const LinkConfig& config) {
  auto make = [&](Node& from, Node& to) {
    auto deliver = [this, &to](Packet&& p) { receive(to, std::move(p)); };
    links_.push_back(std::make_unique<Link>(loop_, from.name() + "->" + to.name(), config, std::move(deliver)));
    return links_.back().get();
  };
  Link* fwd = make(a, b);
  Link* rev = make(b, a);
  return {fwd, rev};
}

void Network::send(Node& from, Packet packet) {
  ++counters_.injected;
  if (packet.flow.dst_addr == from.address()) {
    receive(from, std::move(packet));
    return;
  }
  forward(from, std::move(packet));
}

void Network::send_via(Node&, Link& link, Packet packet) {
  ++counters_.injected;
  link.transmit(std::move(packet));
}

void Network::receive(Node& at, Packet&& packet) {
  if (packet.flow.dst_addr == at.address()) {
    auto it = at.handlers_.find({packet.flow.protocol, packet.flow.dst_port});
    ++counters_.delivered;
    if (it == at.handlers_.end()) {
      ++counters_.unclaimed;
      return;
    }
    it->second(std::move(packet));
    return;
  }
  if (at.intercept_ && at.intercept_(packet)) {
    ++counters_.delivered;
    return;
  }
  forward(at, std::move(packet));
}

void Network::forward(Node& at, Packet&& packet) {
  Link* via = at.route(packet.flow.dst_addr);
  if (via == nullptr) {
    throw std::logic_error("Node " + at.name() + ": no route to " + std::to_string(packet.flow.dst_addr));
  }
  via->transmit(std::move(packet));
}

std::uint64_t Network::dropped() const {
  std::uint64_t n = 0;
  for (const auto& l : links_) n += l->counters().dropped;
  return n;
}

std::uint64_t Network::in_flight() const {
  std::uint64_t n = 0;
  for (const auto& l : links_) n += l->in_flight();
  return n;
}

}  // namespace afmt::sim
