#include "afmt/exp/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace afmt::exp {
namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::uint64_t MetricsRecord::total_bytes() const {
  return std::accumulate(total_bins.begin(), total_bins.end(), std::uint64_t{0});
}

double MetricsRecord::mean_goodput_mib(std::size_t first, std::size_t last) const {
  if (first > last || last >= total_bins.size()) throw std::out_of_range("mean_goodput_mib: bad bin range");
  std::uint64_t sum = 0;
  for (std::size_t i = first; i <= last; ++i) sum += total_bins[i];
  return static_cast<double>(sum) / kMiB / static_cast<double>(last - first + 1) / static_cast<double>(bin.count());
}

std::vector<double> goodput_series(const MetricsRecord& m, std::size_t bin_seconds) {
  const auto base = static_cast<std::size_t>(m.bin.count());
  if (bin_seconds == 0 || bin_seconds % base != 0 || (m.total_bins.size() * base) % bin_seconds != 0) {
    throw std::invalid_argument("goodput_series: bin must divide the run length");
  }
  const std::size_t group = bin_seconds / base;
  std::vector<double> out;
  out.reserve(m.total_bins.size() / group);
  for (std::size_t i = 0; i < m.total_bins.size(); i += group) {
    std::uint64_t bytes = 0;
    for (std::size_t k = 0; k < group; ++k) bytes += m.total_bins[i + k];
    out.push_back(static_cast<double>(bytes) / kMiB / static_cast<double>(bin_seconds));
  }
  return out;
}

std::string format_csv(const MetricsRecord& m) {
  std::ostringstream os;
  os << "time_s";
  for (std::size_t f = 0; f < m.flow_bins.size(); ++f) os << ",flow" << f << "_bytes";
  os << ",total_bytes\n";
  for (std::size_t b = 0; b < m.total_bins.size(); ++b) {
    os << b * static_cast<std::size_t>(m.bin.count());
    for (const auto& fb : m.flow_bins) os << ',' << fb[b];
    os << ',' << m.total_bins[b] << '\n';
  }
  return os.str();
}

std::string format_summary(const MetricsRecord& m) {
  std::ostringstream os;
  os << "variant=" << m.variant << '\n';
  os << "scheduler=" << m.scheduler << '\n';
  os << "seed=" << m.seed << '\n';
  os << "bins=" << m.total_bins.size() << '\n';
  os << "total_bytes=" << m.total_bytes() << '\n';
  os << "total_goodput_mib=" << fixed6(m.total_mib()) << '\n';
  for (std::size_t f = 0; f < m.flow_delivered.size(); ++f) {
    os << "flow" << f << "_bytes=" << m.flow_delivered[f] << '\n';
    os << "flow" << f << "_reordered=" << m.flow_reordered[f] << '\n';
    os << "flow" << f << "_retransmits=" << m.flow_retransmits[f] << '\n';
  }
  const std::uint64_t sub_total = std::accumulate(m.subtunnel_bytes.begin(), m.subtunnel_bytes.end(), std::uint64_t{0});
  for (std::size_t i = 0; i < m.subtunnel_bytes.size(); ++i) {
    const double share = sub_total ? static_cast<double>(m.subtunnel_bytes[i]) / static_cast<double>(sub_total) : 0.0;
    os << "subtunnel" << i << "_bytes=" << m.subtunnel_bytes[i] << '\n';
    os << "subtunnel" << i << "_share=" << fixed6(share) << '\n';
    os << "subtunnel" << i << "_buffer_drops=" << m.subtunnel_buffer_drops[i] << '\n';
  }
  os << "background_bytes=" << m.background_delivered << '\n';
  for (const auto& [queue, drops] : m.queue_drops) os << "drops." << queue << '=' << drops << '\n';
  return os.str();
}

void write_csv(const MetricsRecord& m, const std::filesystem::path& path) {
  write_file(path, format_csv(m));
  auto summary = path;
  summary += ".summary";
  write_file(summary, format_summary(m));
}

}  // namespace afmt::exp
