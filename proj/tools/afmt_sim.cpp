// Command-line driver: single scenario runs and the full goodput sweep.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <future>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "afmt/exp/scenario.hpp"

namespace {

using afmt::exp::MetricsRecord;
using afmt::exp::ScenarioConfig;
using afmt::exp::SchedulerKind;
using afmt::sim::Variant;

struct Cell {
  Variant variant;
  SchedulerKind scheduler;
};

const std::vector<Cell> kSweepCells = {
    {Variant::three_sub, SchedulerKind::rr},   {Variant::three_sub, SchedulerKind::afmt},
    {Variant::two_sub, SchedulerKind::rr},     {Variant::two_sub, SchedulerKind::afmt},
    {Variant::single_path, SchedulerKind::rr},
};

std::string cell_name(const Cell& c) {
  std::string name(afmt::sim::to_string(c.variant));
  if (c.variant != Variant::single_path) name += "_" + std::string(afmt::exp::to_string(c.scheduler));
  return name;
}

void print_table(const std::map<std::pair<Variant, SchedulerKind>, double>& mib) {
  auto get = [&](Variant v, SchedulerKind k) {
    auto it = mib.find({v, k});
    return it == mib.end() ? -1.0 : it->second;
  };
  std::printf("%-38s %10s %10s\n", "Subtunnels", "RR", "AFMT");
  std::printf("%-38s %10.2f %10.2f\n", "Three subtunnels: 16, 32, 50 Mbit/s", get(Variant::three_sub, SchedulerKind::rr),
              get(Variant::three_sub, SchedulerKind::afmt));
  std::printf("%-38s %10.2f %10.2f\n", "Two subtunnels: 32, 50 Mbit/s", get(Variant::two_sub, SchedulerKind::rr),
              get(Variant::two_sub, SchedulerKind::afmt));
  std::printf("%-38s %21.2f\n", "No tunnel, single path, 50 Mbit/s", get(Variant::single_path, SchedulerKind::rr));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipath tunnel scheduling simulator (AFMT vs round robin)"};
  app.require_subcommand(1);

  ScenarioConfig cfg;
  std::string variant = "three-sub";
  std::string scheduler = "afmt";
  int duration_s = 30;

  auto* run = app.add_subcommand("run", "Run one scenario and write its CSV and summary");
  run->add_option("--variant", variant, "three-sub | two-sub | single-path")
      ->check(CLI::IsMember({"three-sub", "two-sub", "single-path"}))
      ->capture_default_str();
  run->add_option("--scheduler", scheduler, "afmt | rr (ignored for single-path)")
      ->check(CLI::IsMember({"afmt", "rr"}))
      ->capture_default_str();
  run->add_option("--seed", cfg.seed, "Seed for payload start jitter")->capture_default_str();
  run->add_option("--out", cfg.output_path, "CSV output path; totals go to <PATH>.summary")->required();
  run->add_option("--decision-log", cfg.decision_log_path, "Write per-packet scheduler decisions as CSV");
  run->add_option("--duration", duration_s, "Simulated seconds")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--queue-capacity", cfg.queue_capacity, "Drop-tail depth in packets")->capture_default_str();
  run->add_option("--payload-rwnd", cfg.payload_receive_window, "Payload TCP receive window, bytes")
      ->capture_default_str();
  run->add_option("--subtunnel-sndbuf", cfg.subtunnel_send_buffer, "Subtunnel send buffer, bytes")
      ->capture_default_str();

  std::uint64_t sweep_seed = 1;
  std::string out_dir;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run all five goodput cells and print the comparison table");
  sweep->add_option("--seed", sweep_seed, "Seed for payload start jitter")->capture_default_str();
  sweep->add_option("--out-dir", out_dir, "Write <cell>.csv and <cell>.csv.summary into this directory");
  sweep->add_option("--jobs", jobs, "Concurrent scenario runs")->check(CLI::PositiveNumber)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cfg.variant = afmt::sim::parse_variant(variant);
      cfg.scheduler = afmt::exp::parse_scheduler(scheduler);
      cfg.sim_duration = std::chrono::seconds(duration_s);
      cfg.payload.stop = std::min(cfg.payload.stop, cfg.sim_duration);
      cfg.payload.start = std::min(cfg.payload.start, cfg.payload.stop);
      cfg.background.stop = std::min(cfg.background.stop, cfg.sim_duration);
      cfg.background.start = std::min(cfg.background.start, cfg.background.stop);
      const MetricsRecord m = afmt::exp::run_scenario(cfg);
      std::printf("%s %s seed=%llu total=%.2f MiB -> %s\n", m.variant.c_str(), m.scheduler.c_str(),
                  static_cast<unsigned long long>(m.seed), m.total_mib(), cfg.output_path.c_str());
      return 0;
    }

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    std::map<std::pair<Variant, SchedulerKind>, double> table;
    std::vector<std::future<MetricsRecord>> pending;
    std::vector<Cell> order;
    auto drain = [&](std::size_t keep) {
      while (pending.size() > keep) {
        const Cell c = order.front();
        const MetricsRecord m = pending.front().get();
        table[{c.variant, c.scheduler}] = m.total_mib();
        pending.erase(pending.begin());
        order.erase(order.begin());
      }
    };
    for (const Cell& c : kSweepCells) {
      ScenarioConfig sc;
      sc.variant = c.variant;
      sc.scheduler = c.scheduler;
      sc.seed = sweep_seed;
      if (!out_dir.empty()) sc.output_path = (std::filesystem::path(out_dir) / (cell_name(c) + ".csv")).string();
      drain(jobs - 1);
      pending.push_back(std::async(std::launch::async, [sc] { return afmt::exp::run_scenario(sc); }));
      order.push_back(c);
    }
    drain(0);
    std::printf("Goodput over the run in MiB (seed %llu)\n", static_cast<unsigned long long>(sweep_seed));
    print_table(table);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
