#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace afmt::exp {

inline constexpr double kMiB = 1024.0 * 1024.0;

struct MetricsRecord {
  std::string variant;
  std::string scheduler;
  std::uint64_t seed = 0;
  std::chrono::seconds bin{1};

  // [flow][bin] payload bytes delivered in order to the client application
  std::vector<std::vector<std::uint64_t>> flow_bins;
  std::vector<std::uint64_t> total_bins;

  std::vector<std::uint64_t> flow_delivered;
  std::vector<std::uint64_t> flow_injected;  // highest byte offset sent
  std::vector<std::uint64_t> flow_reordered;
  std::vector<std::uint64_t> flow_retransmits;
  std::vector<std::uint64_t> flow_timeouts;

  std::vector<std::uint64_t> subtunnel_bytes;  // payload direction
  std::vector<std::uint64_t> subtunnel_buffer_drops;
  std::vector<std::pair<std::string, std::uint64_t>> queue_drops;

  std::uint64_t background_delivered = 0;

  // network-layer packet accounting at the end of the run
  std::uint64_t packets_injected = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_dropped = 0;
  std::uint64_t packets_in_flight = 0;
  std::uint64_t events_executed = 0;

  [[nodiscard]] std::uint64_t total_bytes() const;
  [[nodiscard]] double total_mib() const { return static_cast<double>(total_bytes()) / kMiB; }
  /// Mean of total_bins over [first, last] (inclusive), in MiB/s.
  [[nodiscard]] double mean_goodput_mib(std::size_t first, std::size_t last) const;
};

/// Per-bin goodput in MiB/s with bins of `bin_seconds` (must divide the run length).
std::vector<double> goodput_series(const MetricsRecord& m, std::size_t bin_seconds);

/// Writes the per-second CSV to `path` and key=value totals to `<path>.summary`.
/// Throws std::runtime_error naming the path on I/O failure.
void write_csv(const MetricsRecord& m, const std::filesystem::path& path);
std::string format_csv(const MetricsRecord& m);
std::string format_summary(const MetricsRecord& m);

}  // namespace afmt::exp
