#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace afmt::transport {

using Nanos = std::chrono::nanoseconds;
using FracNanos = std::chrono::duration<double, std::nano>;

inline constexpr Nanos kMinRto = std::chrono::milliseconds(200);
inline constexpr Nanos kInitialRto = std::chrono::seconds(1);

/// Smoothed RTT with the usual 1/8, 1/4 gains. srtt and rttvar are kept in
/// fractional nanoseconds so long sample sequences do not accumulate truncation.
struct RttEstimator {
  FracNanos srtt{0};
  FracNanos rttvar{0};
  FracNanos rto{kInitialRto};
  bool has_sample = false;
};

inline void srtt_update(RttEstimator& est, Nanos sample) {
  if (sample <= Nanos::zero()) throw std::invalid_argument("srtt_update: sample must be positive");
  const FracNanos s{sample};
  if (!est.has_sample) {
    est.srtt = s;
    est.rttvar = s / 2.0;
    est.has_sample = true;
  } else {
    est.rttvar = 0.75 * est.rttvar + 0.25 * FracNanos{std::abs((est.srtt - s).count())};
    est.srtt = 0.875 * est.srtt + 0.125 * s;
  }
  est.rto = std::max(FracNanos{kMinRto}, est.srtt + 4.0 * est.rttvar);
}

}  // namespace afmt::transport
