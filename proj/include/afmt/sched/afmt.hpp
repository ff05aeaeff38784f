#pragma once

// Adaptive flow-aware packet scheduling for multipath tunnels.
//
// A packet of a known flow may only move to a subtunnel on which it is
// predicted to arrive after the previous packet of its flow. Among the
// admissible subtunnels the one with the smallest weighted fill wins:
//
//   weighted_fill = (fill + packet_size) / (cwnd / srtt)
//                 = (fill + packet_size) * srtt / cwnd        [seconds]

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "afmt/sched/flow_id.hpp"
#include "afmt/sched/flow_table.hpp"

namespace afmt::sched {

/// Live view of one subtunnel's transport state.
struct SubtunnelStats {
  Nanos srtt{0};
  std::uint64_t cwnd = 0;  // bytes
  std::uint64_t fill = 0;  // bytes queued or unacknowledged
};

struct SchedDecision {
  std::size_t chosen = 0;
  std::vector<std::size_t> applicable;
  std::vector<double> weighted_fills;  // seconds, aligned with `applicable`
};

/// Subtunnels on which the next packet of the flow arrives strictly after the
/// previous one. `entry.last_subtunnel` comes first, the rest in ascending order.
inline std::vector<std::size_t> applicable_subtunnels(const FlowTableEntry& entry,
                                                      std::span<const SubtunnelStats> stats, Nanos now) {
  if (entry.last_subtunnel >= stats.size()) {
    throw std::out_of_range("applicable_subtunnels: last_subtunnel out of range");
  }
  if (now < entry.last_sent) {
    throw std::invalid_argument("applicable_subtunnels: now precedes last_sent");
  }
  const Nanos delta = now - entry.last_sent;
  const Nanos last_srtt = stats[entry.last_subtunnel].srtt;

  std::vector<std::size_t> out;
  out.reserve(stats.size());
  out.push_back(entry.last_subtunnel);
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (i == entry.last_subtunnel) continue;
    if (stats[i].srtt + delta > last_srtt) out.push_back(i);
  }
  return out;
}

inline double weighted_fill(const SubtunnelStats& s, std::uint64_t packet_size) {
  const auto load = static_cast<double>(s.fill + packet_size);
  return load * static_cast<double>(s.srtt.count()) / static_cast<double>(s.cwnd) * 1e-9;
}

namespace detail {

__extension__ typedef unsigned __int128 u128;

// a.load * a.srtt / a.cwnd < b.load * b.srtt / b.cwnd, without rounding.
inline bool weighted_fill_less(const SubtunnelStats& a, const SubtunnelStats& b, std::uint64_t size) {
  const u128 lhs = u128{a.fill + size} * static_cast<std::uint64_t>(a.srtt.count()) * b.cwnd;
  const u128 rhs = u128{b.fill + size} * static_cast<std::uint64_t>(b.srtt.count()) * a.cwnd;
  return lhs < rhs;
}

}  // namespace detail

/// Picks the candidate with minimal weighted fill; ties go to the lowest index.
inline SchedDecision select_adaptively(std::vector<std::size_t> candidates, std::span<const SubtunnelStats> stats,
                                       std::uint64_t packet_size) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_adaptively: empty candidate set");
  }
  SchedDecision d;
  d.weighted_fills.reserve(candidates.size());
  std::size_t best = candidates.front();
  for (std::size_t idx : candidates) {
    if (idx >= stats.size()) throw std::out_of_range("select_adaptively: candidate out of range");
    const auto& s = stats[idx];
    if (s.cwnd == 0 || s.srtt <= Nanos::zero()) {
      throw std::invalid_argument("select_adaptively: cwnd and srtt must be positive");
    }
    d.weighted_fills.push_back(weighted_fill(s, packet_size));
    if (detail::weighted_fill_less(s, stats[best], packet_size) ||
        (idx < best && !detail::weighted_fill_less(stats[best], s, packet_size))) {
      best = idx;
    }
  }
  d.chosen = best;
  d.applicable = std::move(candidates);
  return d;
}

/// One scheduling step: chooses a subtunnel for a packet of `flow` and records
/// the choice in `table`.
inline SchedDecision afmt_schedule(const FlowId& flow, std::uint64_t packet_size, FlowTable& table,
                                   std::span<const SubtunnelStats> stats, Nanos now) {
  if (stats.empty()) throw std::invalid_argument("afmt_schedule: no subtunnels");
  std::vector<std::size_t> candidates;
  if (auto entry = table.find(flow)) {
    candidates = applicable_subtunnels(*entry, stats, now);
  } else {
    candidates.resize(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) candidates[i] = i;
  }
  SchedDecision d = select_adaptively(std::move(candidates), stats, packet_size);
  table.update(flow, {d.chosen, now});
  return d;
}

template <FiveTupleHeader P>
SchedDecision afmt_schedule(const P& packet, std::uint64_t packet_size, FlowTable& table,
                            std::span<const SubtunnelStats> stats, Nanos now) {
  return afmt_schedule(flow_id_of(packet), packet_size, table, stats, now);
}

/// Flow table plus the periodic idle eviction policy.
class AfmtScheduler {
 public:
  explicit AfmtScheduler(Nanos idle_timeout = kDefaultFlowIdleTimeout) : idle_timeout_(idle_timeout) {}

  SchedDecision schedule(const FlowId& flow, std::uint64_t packet_size, std::span<const SubtunnelStats> stats,
                         Nanos now) {
    return afmt_schedule(flow, packet_size, table_, stats, now);
  }

  std::size_t evict_idle(Nanos now) { return table_.evict(now, idle_timeout_); }

  [[nodiscard]] const FlowTable& table() const noexcept { return table_; }
  [[nodiscard]] Nanos idle_timeout() const noexcept { return idle_timeout_; }

 private:
  FlowTable table_;
  Nanos idle_timeout_;
};

}  // namespace afmt::sched
