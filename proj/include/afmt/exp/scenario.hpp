#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "afmt/exp/metrics.hpp"
#include "afmt/exp/tunnel.hpp"
#include "afmt/sim/topology.hpp"

namespace afmt::exp {

using sim::Variant;
using Nanos = std::chrono::nanoseconds;

struct Window {
  Nanos start;
  Nanos stop;
};

struct ScenarioConfig {
  Variant variant = Variant::three_sub;
  SchedulerKind scheduler = SchedulerKind::afmt;  // ignored by single-path
  Nanos sim_duration = std::chrono::seconds(30);
  Window payload{std::chrono::seconds(4), std::chrono::seconds(24)};
  Window background{std::chrono::seconds(8), std::chrono::seconds(16)};
  std::uint64_t seed = 1;
  std::string output_path;        // CSV + .summary written here when set
  std::string decision_log_path;  // per-packet scheduler decisions (payload direction) when set

  std::size_t n_flows = 3;
  Nanos start_jitter = std::chrono::milliseconds(1);
  std::size_t queue_capacity = sim::kDefaultQueueCapacity;
  std::uint64_t payload_receive_window = 131072;
  std::uint64_t subtunnel_send_buffer = 131072;
  std::uint64_t subtunnel_receive_window = 131072;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// Builds the topology, installs the payload and background flows and the
/// tunnel endpoints, runs to sim_duration and collects metrics.
MetricsRecord run_scenario(const ScenarioConfig& config);

}  // namespace afmt::exp
