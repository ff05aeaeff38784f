#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "afmt/transport/congestion.hpp"
#include "afmt/transport/framing.hpp"
#include "afmt/transport/rtt_estimator.hpp"
#include "afmt/transport/tcp.hpp"
#include "oracles.hpp"

namespace {

using namespace std::chrono_literals;
using namespace afmt::transport;

double ms(FracNanos d) { return d.count() / 1e6; }

TEST(SrttUpdate, FirstSampleInitializes) {
  RttEstimator e;
  srtt_update(e, 40ms);
  EXPECT_TRUE(e.has_sample);
  EXPECT_DOUBLE_EQ(ms(e.srtt), 40.0);
  EXPECT_DOUBLE_EQ(ms(e.rttvar), 20.0);
  EXPECT_DOUBLE_EQ(ms(e.rto), 200.0);  // 40 + 4*20 = 120 is below the floor
}

TEST(SrttUpdate, SubsequentSampleSmooths) {
  RttEstimator e;
  e.srtt = FracNanos{100ms};
  e.rttvar = FracNanos{10ms};
  e.has_sample = true;
  srtt_update(e, 60ms);
  // rttvar = 3/4 * 10 + 1/4 * |100 - 60| ; srtt = 7/8 * 100 + 1/8 * 60
  EXPECT_NEAR(ms(e.rttvar), 17.5, 1e-9);
  EXPECT_NEAR(ms(e.srtt), 95.0, 1e-9);
  EXPECT_DOUBLE_EQ(ms(e.rto), 200.0);  // 95 + 4*17.5 = 165 is below the floor
}

TEST(SrttUpdate, ConstantSamplesConverge) {
  RttEstimator e;
  srtt_update(e, 10ms);
  double prev_var = ms(e.rttvar);
  for (int i = 0; i < 200; ++i) {
    srtt_update(e, 10ms);
    EXPECT_DOUBLE_EQ(ms(e.srtt), 10.0);
    EXPECT_LT(ms(e.rttvar), prev_var);
    prev_var = ms(e.rttvar);
  }
  EXPECT_LT(prev_var, 1e-20);
}

TEST(SrttUpdate, RejectsNonPositiveSample) {
  RttEstimator e;
  EXPECT_THROW(srtt_update(e, 0ns), std::invalid_argument);
  EXPECT_THROW(srtt_update(e, -5ns), std::invalid_argument);
  EXPECT_FALSE(e.has_sample);
}

TEST(SrttUpdate, RtoFloorAndFormulaAlways) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> d(1, 3'000'000'000);
  RttEstimator e;
  EXPECT_GE(e.rto, FracNanos{kMinRto});
  for (int i = 0; i < 5000; ++i) {
    srtt_update(e, std::chrono::nanoseconds(i % 3 == 0 ? d(rng) % 1'000'000 + 1 : d(rng)));
    EXPECT_GE(e.rto, FracNanos{kMinRto});
    EXPECT_DOUBLE_EQ(e.rto.count(), std::max(FracNanos{kMinRto}.count(), e.srtt.count() + 4 * e.rttvar.count()));
    EXPECT_GT(e.srtt.count(), 0);
    EXPECT_GE(e.rttvar.count(), 0);
  }
}

TEST(SrttUpdate, MatchesClosedForm) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> d(1, 500'000'000);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::chrono::nanoseconds> samples(1 + trial % 97);
    for (auto& s : samples) s = std::chrono::nanoseconds(d(rng));
    RttEstimator e;
    for (auto s : samples) srtt_update(e, s);
    const long double closed = afmt::test::oracle_srtt_closed_form(samples);
    const auto ref = afmt::test::oracle_ewma(samples);
    EXPECT_LE(std::fabs((e.srtt.count() - closed) / closed), 1e-9);
    EXPECT_LE(std::fabs((e.rttvar.count() - ref.rttvar) / ref.rttvar), 1e-9);
  }
}

constexpr std::uint64_t kM = 1000;

TEST(OnAck, SlowStartAddsOneSegment) {
  auto cs = CongestionState::initial(kMss);
  on_ack(cs, kMss, kMss);
  EXPECT_EQ(cs.cwnd, 11u * kMss);
  on_ack(cs, 5 * kMss, kMss);  // capped at one MSS per ACK
  EXPECT_EQ(cs.cwnd, 12u * kMss);
  on_ack(cs, 100, kMss);
  EXPECT_EQ(cs.cwnd, 12u * kMss + 100);
}

TEST(OnAck, CongestionAvoidanceAddsMssSquaredOverCwnd) {
  CongestionState cs{10000, 5000, CcPhase::congestion_avoidance, 0};
  on_ack(cs, kM, kM);
  EXPECT_EQ(cs.cwnd, 10100u);
}

TEST(OnAck, CrossingSsthreshSwitchesPhase) {
  CongestionState cs{9500, 10000, CcPhase::slow_start, 0};
  on_ack(cs, kM, kM);
  EXPECT_EQ(cs.cwnd, 10500u);
  EXPECT_EQ(cs.phase, CcPhase::congestion_avoidance);
}

TEST(OnAck, ResetsDupAcksAndRejectsZero) {
  CongestionState cs{10000, kSsthreshUnset, CcPhase::slow_start, 2};
  on_ack(cs, kM, kM);
  EXPECT_EQ(cs.dup_acks, 0u);
  EXPECT_THROW(on_ack(cs, 0, kM), std::invalid_argument);
}

TEST(OnAck, WindowNeverShrinksWithoutLoss) {
  auto cs = CongestionState::initial(kMss);
  cs.ssthresh = 40 * kMss;
  std::uint64_t prev = cs.cwnd;
  for (int i = 0; i < 10000; ++i) {
    on_ack(cs, 1 + (i * 7919) % (3 * kMss), kMss);
    ASSERT_GE(cs.cwnd, prev);
    prev = cs.cwnd;
  }
}

TEST(OnDupAck, BelowThresholdDoesNothing) {
  CongestionState cs{20000, kSsthreshUnset, CcPhase::slow_start, 0};
  EXPECT_EQ(on_dup_ack(cs, kM), DupAckAction::none);
  EXPECT_EQ(cs.dup_acks, 1u);
  EXPECT_EQ(on_dup_ack(cs, kM), DupAckAction::none);
  EXPECT_EQ(cs.dup_acks, 2u);
  EXPECT_EQ(cs.cwnd, 20000u);
}

TEST(OnDupAck, ThirdHalvesWindow) {
  CongestionState cs{20000, kSsthreshUnset, CcPhase::congestion_avoidance, 2};
  EXPECT_EQ(on_dup_ack(cs, kM), DupAckAction::fast_retransmit);
  EXPECT_EQ(cs.ssthresh, 10000u);
  EXPECT_EQ(cs.cwnd, 10000u);
  EXPECT_EQ(cs.phase, CcPhase::fast_recovery);
}

TEST(OnDupAck, HalvingFloorIsTwoSegments) {
  CongestionState cs{3000, kSsthreshUnset, CcPhase::congestion_avoidance, 2};
  on_dup_ack(cs, kM);
  EXPECT_EQ(cs.ssthresh, 2000u);
}

TEST(OnDupAck, NewAckResetsCounter) {
  CongestionState cs{20000, kSsthreshUnset, CcPhase::slow_start, 0};
  on_dup_ack(cs, kM);
  on_dup_ack(cs, kM);
  on_ack(cs, kM, kM);
  EXPECT_EQ(cs.dup_acks, 0u);
  EXPECT_EQ(on_dup_ack(cs, kM), DupAckAction::none);
}

TEST(OnDupAck, RecoveryInflatesAndExitDeflates) {
  CongestionState cs{20000, kSsthreshUnset, CcPhase::congestion_avoidance, 2};
  on_dup_ack(cs, kM);
  on_dup_ack(cs, kM);
  EXPECT_EQ(cs.cwnd, 11000u);
  on_recovery_exit(cs);
  EXPECT_EQ(cs.cwnd, 10000u);
  EXPECT_EQ(cs.phase, CcPhase::congestion_avoidance);
}

TEST(OnTimeout, HalvesThresholdAndCollapsesWindow) {
  CongestionState cs{40000, kSsthreshUnset, CcPhase::congestion_avoidance, 1};
  on_timeout(cs, kM);
  EXPECT_EQ(cs.ssthresh, 20000u);
  EXPECT_EQ(cs.cwnd, 1000u);
  EXPECT_EQ(cs.phase, CcPhase::slow_start);
}

TEST(OnTimeout, AtOneSegment) {
  CongestionState cs{1000, 5000, CcPhase::fast_recovery, 0};
  on_timeout(cs, kM);
  EXPECT_EQ(cs.ssthresh, 2000u);
  EXPECT_EQ(cs.cwnd, 1000u);
  EXPECT_EQ(cs.phase, CcPhase::slow_start);
}

std::vector<std::uint8_t> bytes(std::size_t n, std::uint8_t seed = 0) {
  std::vector<std::uint8_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint8_t>(seed + i * 31);
  return v;
}

TEST(Frame, EncodesBigEndianLength) {
  const auto out = frame_encode(bytes(1500));
  ASSERT_EQ(out.size(), 1508u);
  const std::vector<std::uint8_t> head(out.begin(), out.begin() + 8);
  EXPECT_EQ(head, (std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0x05, 0xDC}));
  EXPECT_TRUE(std::equal(out.begin() + 8, out.end(), bytes(1500).begin()));
}

TEST(Frame, EmptyDatagram) {
  EXPECT_EQ(frame_encode({}), std::vector<std::uint8_t>(8, 0));
}

TEST(Frame, RoundTrip) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    auto d = bytes(rng() % 3000, static_cast<std::uint8_t>(i));
    const auto r = frame_decode(frame_encode(d));
    ASSERT_EQ(r.datagrams.size(), 1u);
    EXPECT_EQ(r.datagrams[0], d);
    EXPECT_TRUE(r.remainder.empty());
  }
}

TEST(Frame, TwoFramesBackToBack) {
  auto a = frame_encode(bytes(10, 1));
  const auto b = frame_encode(bytes(20, 2));
  a.insert(a.end(), b.begin(), b.end());
  const auto r = frame_decode(a);
  ASSERT_EQ(r.datagrams.size(), 2u);
  EXPECT_EQ(r.datagrams[0], bytes(10, 1));
  EXPECT_EQ(r.datagrams[1], bytes(20, 2));
  EXPECT_TRUE(r.remainder.empty());
}

TEST(Frame, IncompletePayloadStaysInRemainder) {
  auto a = frame_encode(bytes(100));
  a.pop_back();
  const auto r = frame_decode(a);
  EXPECT_TRUE(r.datagrams.empty());
  EXPECT_EQ(r.remainder, a);
}

TEST(Frame, IncompleteHeaderStaysInRemainder) {
  const std::vector<std::uint8_t> seven{0, 0, 0, 0, 0, 0, 5};
  const auto r = frame_decode(seven);
  EXPECT_TRUE(r.datagrams.empty());
  EXPECT_EQ(r.remainder, seven);
}

TEST(Frame, DecodedPlusRemainderReassemblesInput) {
  std::vector<std::uint8_t> stream;
  for (int i = 0; i < 5; ++i) frame_encode_into(bytes(50 * i, 7), stream);
  stream.insert(stream.end(), {0, 0, 0, 0, 0, 0, 1, 0, 42});
  const auto r = frame_decode(stream);
  std::vector<std::uint8_t> rebuilt;
  for (const auto& d : r.datagrams) frame_encode_into(d, rebuilt);
  rebuilt.insert(rebuilt.end(), r.remainder.begin(), r.remainder.end());
  EXPECT_EQ(rebuilt, stream);
  EXPECT_EQ(r.datagrams.size(), 5u);
}

TEST(FrameDecoder, ByteAtATime) {
  std::vector<std::uint8_t> stream;
  frame_encode_into(bytes(3), stream);
  frame_encode_into({}, stream);
  frame_encode_into(bytes(1500), stream);
  FrameDecoder dec;
  std::vector<std::vector<std::uint8_t>> got;
  for (std::uint8_t b : stream) {
    for (auto& d : dec.feed(std::span<const std::uint8_t>(&b, 1))) got.push_back(std::move(d));
  }
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0], bytes(3));
  EXPECT_TRUE(got[1].empty());
  EXPECT_EQ(got[2], bytes(1500));
  EXPECT_EQ(dec.buffered(), 0u);
}

TEST(FrameDecoder, RandomChunkingMatchesWholeStream) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint8_t> stream;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) frame_encode_into(bytes(rng() % 2000, static_cast<std::uint8_t>(rng())), stream);
    const auto whole = frame_decode(stream).datagrams;
    FrameDecoder dec;
    std::vector<std::vector<std::uint8_t>> got;
    std::size_t pos = 0;
    while (pos < stream.size()) {
      const std::size_t len = std::min<std::size_t>(stream.size() - pos, rng() % 3000);
      for (auto& d : dec.feed(std::span(stream).subspan(pos, len))) got.push_back(std::move(d));
      pos += len;
    }
    EXPECT_EQ(got, whole);
    EXPECT_EQ(dec.buffered(), 0u);
  }
}

}  // namespace
