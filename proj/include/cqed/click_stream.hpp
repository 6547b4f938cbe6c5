#pragma once

#include <cstdint>
#include <vector>

#include "cqed/source_sim.hpp"

namespace cqed {

// The artifact's central exchange format: detector events plus the timing
// metadata needed to interpret them. Records are sorted by
// (cycle_id, timestamp_ns).
struct ClickStream {
  std::int64_t tau_period_ns = 4000;
  std::int64_t tau_pump_ns = 2000;
  std::int64_t pulses_per_cycle = 2000;
  std::int64_t cycles = 0;
  std::uint64_t seed = 0;
  std::vector<ClickRecord> clicks;

  std::int64_t cycle_window_ns() const {
    return pulses_per_cycle * tau_period_ns;
  }
  double total_time_s() const {
    return static_cast<double>(cycles) * cycle_window_ns() * 1e-9;
  }
};

ClickStream to_click_stream(const SimOutput& out);

}  // namespace cqed
