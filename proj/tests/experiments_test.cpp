#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "afmt/exp/metrics.hpp"
#include "afmt/exp/scenario.hpp"

namespace {

using namespace std::chrono_literals;
using afmt::exp::MetricsRecord;
using afmt::exp::ScenarioConfig;
using afmt::exp::SchedulerKind;
using afmt::sim::Variant;

const MetricsRecord& cached_run(Variant v, SchedulerKind s) {
  static std::map<std::pair<Variant, SchedulerKind>, MetricsRecord> cache;
  auto key = std::make_pair(v, s);
  auto it = cache.find(key);
  if (it == cache.end()) {
    ScenarioConfig c;
    c.variant = v;
    c.scheduler = s;
    it = cache.emplace(key, afmt::exp::run_scenario(c)).first;
  }
  return it->second;
}

struct Cell {
  Variant variant;
  SchedulerKind scheduler;
};

std::string cell_name(const ::testing::TestParamInfo<Cell>& info) {
  std::string n = std::string(afmt::sim::to_string(info.param.variant)) + "_" +
                  std::string(afmt::exp::to_string(info.param.scheduler));
  for (auto& ch : n)
    if (ch == '-') ch = '_';
  return n;
}

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / ("afmt_exp_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

MetricsRecord hand_record() {
  MetricsRecord m;
  m.variant = "two-sub";
  m.scheduler = "rr";
  m.seed = 9;
  m.flow_bins = {{0, 10, 20}, {0, 1, 2}, {5, 0, 0}};
  m.total_bins = {5, 11, 22};
  m.flow_delivered = {30, 3, 5};
  m.flow_injected = {30, 3, 5};
  m.flow_reordered = {1, 2, 3};
  m.flow_retransmits = {4, 5, 6};
  m.flow_timeouts = {0, 0, 0};
  m.subtunnel_bytes = {300, 100};
  m.subtunnel_buffer_drops = {0, 7};
  m.queue_drops = {{"R0->E", 12}};
  m.background_delivered = 42;
  return m;
}

TEST(GoodputSeries, UniformDelivery) {
  MetricsRecord m;
  m.total_bins.assign(30, 1 << 20);
  const auto one = afmt::exp::goodput_series(m, 1);
  ASSERT_EQ(one.size(), 30u);
  for (double v : one) EXPECT_DOUBLE_EQ(v, 1.0);
  const auto five = afmt::exp::goodput_series(m, 5);
  ASSERT_EQ(five.size(), 6u);
  for (double v : five) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(GoodputSeries, SingleBinHoldsEverything) {
  MetricsRecord m;
  m.total_bins.assign(30, 0);
  m.total_bins[7] = 3 << 20;
  const auto s = afmt::exp::goodput_series(m, 1);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_DOUBLE_EQ(s[i], i == 7 ? 3.0 : 0.0);
}

TEST(GoodputSeries, BinMustDivideRun) {
  MetricsRecord m;
  m.total_bins.assign(30, 0);
  EXPECT_THROW(afmt::exp::goodput_series(m, 7), std::invalid_argument);
  EXPECT_THROW(afmt::exp::goodput_series(m, 0), std::invalid_argument);
}

TEST(GoodputSeries, SumMatchesTotalOnSimulatedRun) {
  const auto& m = cached_run(Variant::three_sub, SchedulerKind::afmt);
  for (std::size_t bin : {1u, 2u, 3u, 5u}) {
    const auto s = afmt::exp::goodput_series(m, bin);
    const double sum = std::accumulate(s.begin(), s.end(), 0.0) * static_cast<double>(bin);
    EXPECT_NEAR(sum, m.total_mib(), 1e-9 * m.total_mib());
  }
}

TEST(MeanGoodput, InclusiveRange) {
  MetricsRecord m;
  m.total_bins = {0, 1 << 20, 3 << 20, 0};
  EXPECT_DOUBLE_EQ(m.mean_goodput_mib(1, 2), 2.0);
  EXPECT_THROW((void)m.mean_goodput_mib(2, 4), std::out_of_range);
}

TEST(FormatCsv, ExactSchema) {
  EXPECT_EQ(afmt::exp::format_csv(hand_record()),
            "time_s,flow0_bytes,flow1_bytes,flow2_bytes,total_bytes\n"
            "0,0,0,5,5\n"
            "1,10,1,0,11\n"
            "2,20,2,0,22\n");
}

TEST(FormatSummary, KeyValueLines) {
  EXPECT_EQ(afmt::exp::format_summary(hand_record()),
            "variant=two-sub\n"
            "scheduler=rr\n"
            "seed=9\n"
            "bins=3\n"
            "total_bytes=38\n"
            "total_goodput_mib=0.000036\n"
            "flow0_bytes=30\nflow0_reordered=1\nflow0_retransmits=4\n"
            "flow1_bytes=3\nflow1_reordered=2\nflow1_retransmits=5\n"
            "flow2_bytes=5\nflow2_reordered=3\nflow2_retransmits=6\n"
            "subtunnel0_bytes=300\nsubtunnel0_share=0.750000\nsubtunnel0_buffer_drops=0\n"
            "subtunnel1_bytes=100\nsubtunnel1_share=0.250000\nsubtunnel1_buffer_drops=7\n"
            "background_bytes=42\n"
            "drops.R0->E=12\n");
}

TEST(WriteCsv, ReportsPathOnFailure) {
  try {
    afmt::exp::write_csv(hand_record(), "/nonexistent-dir/x.csv");
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

// Reads the files the way a downstream plotting script would.
TEST(WriteCsv, SimulatedRunFilesAreSelfConsistent) {
  const auto dir = temp_dir();
  const auto csv = dir / "three-sub-rr.csv";
  const auto& m = cached_run(Variant::three_sub, SchedulerKind::rr);
  afmt::exp::write_csv(m, csv);

  const auto lines = split(slurp(csv), '\n');
  ASSERT_EQ(lines.size(), 31u);
  EXPECT_EQ(lines[0], "time_s,flow0_bytes,flow1_bytes,flow2_bytes,total_bytes");
  std::uint64_t column_sum = 0;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = split(lines[r], ',');
    ASSERT_EQ(f.size(), 5u);
    EXPECT_EQ(std::stoull(f[0]), r - 1);
    EXPECT_EQ(std::stoull(f[1]) + std::stoull(f[2]) + std::stoull(f[3]), std::stoull(f[4]));
    column_sum += std::stoull(f[4]);
  }

  std::map<std::string, std::string> kv;
  for (const auto& line : split(slurp(dir / "three-sub-rr.csv.summary"), '\n')) {
    const auto eq = line.find('=');
    ASSERT_NE(eq, std::string::npos) << line;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  EXPECT_EQ(std::stoull(kv.at("total_bytes")), column_sum);
  EXPECT_NEAR(std::stod(kv.at("total_goodput_mib")), static_cast<double>(column_sum) / afmt::exp::kMiB, 1e-6);
  EXPECT_EQ(kv.at("variant"), "three-sub");
  EXPECT_EQ(kv.at("scheduler"), "rr");
  EXPECT_EQ(kv.at("bins"), "30");
  for (int f = 0; f < 3; ++f) {
    EXPECT_TRUE(kv.count("flow" + std::to_string(f) + "_reordered"));
    EXPECT_TRUE(kv.count("flow" + std::to_string(f) + "_retransmits"));
  }
  double share = 0;
  for (int i = 0; i < 3; ++i) share += std::stod(kv.at("subtunnel" + std::to_string(i) + "_share"));
  EXPECT_NEAR(share, 1.0, 1e-5);
  std::filesystem::remove_all(dir);
}

TEST(RunScenario, WritesOutputsWhenRequested) {
  const auto dir = temp_dir();
  ScenarioConfig c;
  c.variant = Variant::two_sub;
  c.scheduler = SchedulerKind::afmt;
  c.sim_duration = 10s;
  c.payload = {2s, 6s};
  c.background = {3s, 5s};
  c.output_path = (dir / "run.csv").string();
  c.decision_log_path = (dir / "decisions.csv").string();
  const auto m = afmt::exp::run_scenario(c);
  EXPECT_EQ(slurp(dir / "run.csv"), afmt::exp::format_csv(m));
  EXPECT_EQ(slurp(dir / "run.csv.summary"), afmt::exp::format_summary(m));
  const auto log = split(slurp(dir / "decisions.csv"), '\n');
  ASSERT_GT(log.size(), 1000u);
  EXPECT_EQ(log[0], "time_ns,src_addr,dst_addr,protocol,src_port,dst_port,chosen,applicable");
  for (std::size_t i = 1; i < 50; ++i) {
    const auto f = split(log[i], ',');
    ASSERT_EQ(f.size(), 8u);
    const auto chosen = f[6];
    const auto applicable = split(f[7], ';');
    EXPECT_NE(std::find(applicable.begin(), applicable.end(), chosen), applicable.end());
  }
  std::filesystem::remove_all(dir);
}

TEST(ScenarioConfig, Validation) {
  auto bad = [](auto mutate) {
    ScenarioConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(afmt::exp::run_scenario(c), std::invalid_argument);
  };
  bad([](ScenarioConfig& c) { c.payload = {4s, 31s}; });
  bad([](ScenarioConfig& c) { c.payload = {10s, 5s}; });
  bad([](ScenarioConfig& c) { c.background = {-1s, 5s}; });
  bad([](ScenarioConfig& c) { c.sim_duration = 1500ms; });
  bad([](ScenarioConfig& c) { c.sim_duration = 0s; });
  bad([](ScenarioConfig& c) { c.n_flows = 0; });
  bad([](ScenarioConfig& c) { c.queue_capacity = 0; });
  bad([](ScenarioConfig& c) { c.payload_receive_window = 100; });
  bad([](ScenarioConfig& c) { c.subtunnel_send_buffer = 100; });
  bad([](ScenarioConfig& c) { c.start_jitter = -1ms; });
  EXPECT_NO_THROW(ScenarioConfig{}.validate());
}

class ScenarioCell : public ::testing::TestWithParam<Cell> {};

TEST_P(ScenarioCell, NothingBeforePayloadStart) {
  const auto& m = cached_run(GetParam().variant, GetParam().scheduler);
  ASSERT_EQ(m.total_bins.size(), 30u);
  for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(m.total_bins[b], 0u) << "bin " << b;
  EXPECT_GT(m.total_bins[4], 0u);
}

TEST_P(ScenarioCell, BinsPartitionDeliveredBytes) {
  const auto& m = cached_run(GetParam().variant, GetParam().scheduler);
  ASSERT_EQ(m.flow_bins.size(), 3u);
  std::uint64_t all = 0;
  for (std::size_t f = 0; f < 3; ++f) {
    const auto sum = std::accumulate(m.flow_bins[f].begin(), m.flow_bins[f].end(), std::uint64_t{0});
    EXPECT_EQ(sum, m.flow_delivered[f]);
    EXPECT_LE(m.flow_delivered[f], m.flow_injected[f]);
    EXPECT_GT(m.flow_delivered[f], 0u);
    all += sum;
  }
  for (std::size_t b = 0; b < m.total_bins.size(); ++b) {
    std::uint64_t s = 0;
    for (const auto& fb : m.flow_bins) s += fb[b];
    EXPECT_EQ(s, m.total_bins[b]);
  }
  EXPECT_EQ(all, m.total_bytes());
}

TEST_P(ScenarioCell, PacketConservation) {
  const auto& m = cached_run(GetParam().variant, GetParam().scheduler);
  EXPECT_EQ(m.packets_injected, m.packets_delivered + m.packets_dropped + m.packets_in_flight);
}

TEST_P(ScenarioCell, BackgroundOnlyWithThirtyTwoMegabitUplink) {
  const auto& m = cached_run(GetParam().variant, GetParam().scheduler);
  if (GetParam().variant == Variant::single_path) {
    EXPECT_EQ(m.background_delivered, 0u);
  } else {
    EXPECT_GT(m.background_delivered, 0u);
  }
}

TEST_P(ScenarioCell, SubtunnelCountMatchesVariant) {
  const auto& m = cached_run(GetParam().variant, GetParam().scheduler);
  EXPECT_EQ(m.subtunnel_bytes.size(), afmt::sim::uplink_rates(GetParam().variant).size());
}

INSTANTIATE_TEST_SUITE_P(AllCells, ScenarioCell,
                         ::testing::Values(Cell{Variant::three_sub, SchedulerKind::afmt},
                                           Cell{Variant::three_sub, SchedulerKind::rr},
                                           Cell{Variant::two_sub, SchedulerKind::afmt},
                                           Cell{Variant::two_sub, SchedulerKind::rr},
                                           Cell{Variant::single_path, SchedulerKind::afmt}),
                         cell_name);

TEST(SinglePath, BelowLinkCapacity) {
  const auto& m = cached_run(Variant::single_path, SchedulerKind::afmt);
  // 50 Mbit/s for 20 s
  EXPECT_LE(m.total_bytes(), 125'000'000u);
  EXPECT_LE(m.total_mib(), 119.21);
}

TEST(SinglePath, NeverReorders) {
  const auto& m = cached_run(Variant::single_path, SchedulerKind::afmt);
  for (auto r : m.flow_reordered) EXPECT_EQ(r, 0u);
}

TEST(SinglePath, IgnoresScheduler) {
  ScenarioConfig c;
  c.variant = Variant::single_path;
  c.sim_duration = 8s;
  c.payload = {1s, 6s};
  c.background = {2s, 4s};
  c.scheduler = SchedulerKind::afmt;
  auto a = afmt::exp::run_scenario(c);
  c.scheduler = SchedulerKind::rr;
  auto b = afmt::exp::run_scenario(c);
  EXPECT_EQ(a.total_bins, b.total_bins);
}

TEST(Scenario, SameSeedSameCsv) {
  ScenarioConfig c;
  c.sim_duration = 8s;
  c.payload = {1s, 6s};
  c.background = {2s, 4s};
  c.scheduler = SchedulerKind::rr;
  c.seed = 77;
  EXPECT_EQ(afmt::exp::format_csv(afmt::exp::run_scenario(c)), afmt::exp::format_csv(afmt::exp::run_scenario(c)));
}

TEST(Scenario, RrSplitsEvenly) {
  const auto& m = cached_run(Variant::three_sub, SchedulerKind::rr);
  const auto lo = *std::min_element(m.subtunnel_bytes.begin(), m.subtunnel_bytes.end());
  const auto hi = *std::max_element(m.subtunnel_bytes.begin(), m.subtunnel_bytes.end());
  EXPECT_LE(static_cast<double>(hi - lo), 0.01 * static_cast<double>(hi));
}

TEST(Scenario, AfmtFavoursFasterSubtunnels) {
  const auto& m = cached_run(Variant::three_sub, SchedulerKind::afmt);
  EXPECT_LT(m.subtunnel_bytes[0], m.subtunnel_bytes[2]);
}

}  // namespace
