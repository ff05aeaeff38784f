#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "afmt/sched/flow_id.hpp"

namespace afmt::sched {

using Nanos = std::chrono::nanoseconds;

/// Last subtunnel a flow was sent on and when.
struct FlowTableEntry {
  std::size_t last_subtunnel = 0;
  Nanos last_sent{0};

  friend constexpr bool operator==(const FlowTableEntry&, const FlowTableEntry&) = default;
};

class FlowTable {
 public:
  [[nodiscard]] std::optional<FlowTableEntry> find(const FlowId& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  /// Inserts or overwrites. Timestamps of an existing flow may not go backwards.
  void update(const FlowId& id, FlowTableEntry entry) {
    auto [it, inserted] = entries_.try_emplace(id, entry);
    if (!inserted) {
      if (entry.last_sent < it->second.last_sent) {
        throw std::invalid_argument("FlowTable::update: last_sent moved backwards");
      }
      it->second = entry;
    }
  }

  /// Removes entries idle for strictly longer than idle_timeout.
  std::size_t evict(Nanos now, Nanos idle_timeout) {
    if (idle_timeout <= Nanos::zero()) {
      throw std::invalid_argument("FlowTable::evict: idle_timeout must be positive");
    }
    return std::erase_if(entries_, [&](const auto& kv) { return now - kv.second.last_sent > idle_timeout; });
  }

  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

 private:
  std::unordered_map<FlowId, FlowTableEntry, FlowIdHash> entries_;
};

inline std::size_t flow_table_evict(FlowTable& table, Nanos now, Nanos idle_timeout) {
  return table.evict(now, idle_timeout);
}

inline constexpr Nanos kDefaultFlowIdleTimeout = std::chrono::seconds(60);

}  // namespace afmt::sched
