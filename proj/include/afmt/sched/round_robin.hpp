#pragma once

#include <cstddef>
#include <stdexcept>

namespace afmt::sched {

/// Flow- and stats-oblivious rotation over n subtunnels.
struct RoundRobinCursor {
  std::size_t next = 0;
};

inline std::size_t rr_schedule(RoundRobinCursor& cursor, std::size_t n_subtunnels) {
  if (n_subtunnels == 0) throw std::invalid_argument("rr_schedule: no subtunnels");
  const std::size_t out = cursor.next % n_subtunnels;
  cursor.next = (out + 1) % n_subtunnels;
  return out;
}

}  // namespace afmt::sched
