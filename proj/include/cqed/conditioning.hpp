#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cqed/click_stats.hpp"
#include "cqed/click_stream.hpp"

namespace cqed {

// Per-pulse click counts, indexed by the global pump-interval number
// k = cycle_id * pulses_per_cycle + local pulse index. Clicks landing in
// recycle intervals are discarded. Only non-empty pulses are stored.
struct PulseCounts {
  struct Entry {
    std::int64_t k = 0;
    std::int32_t n1 = 0;
    std::int32_t n2 = 0;
    std::int32_t n() const { return n1 + n2; }
  };

  std::int64_t pulses_per_cycle = 0;
  std::int64_t n_cycles = 0;
  std::vector<Entry> entries;        // sorted by k
  std::int64_t total_pump_clicks = 0;

  std::int64_t total_pulses() const { return pulses_per_cycle * n_cycles; }
  std::int64_t cycle_of(std::int64_t k) const { return k / pulses_per_cycle; }
  // Counts at pulse k; zero if the pulse is empty.
  std::int32_t n(std::int64_t k) const;
  std::int32_t n1(std::int64_t k) const;
  std::int32_t n2(std::int64_t k) const;
};

PulseCounts bin_clicks_to_pulses(const ClickStream& stream);

// Trigger pulses k_i (n(k_i) > 0) and the per-detector counts of the pump
// interval that immediately follows each one. Triggers in the last pump
// pulse of a cycle are dropped: their follow-up interval does not exist.
struct SelectedSeries {
  std::vector<std::int64_t> trigger_k;
  std::vector<std::int32_t> m1;
  std::vector<std::int32_t> m2;
  std::int64_t pulses_per_cycle = 0;

  std::size_t size() const { return trigger_k.size(); }
  double mean_m1() const;
  double mean_m2() const;
};

SelectedSeries select_triggered(const PulseCounts& pulses);

// p_atom and the per-pulse mean counts that enter it.
struct ConditioningStats {
  double n_bar_p = 0.0;  // mean photon counts per pump pulse, both detectors
  double n_bar_n = 0.0;  // mean noise counts per pump pulse, both detectors
  double p_atom = 0.0;
  double eta = 0.36;     // overall detection efficiency
  bool clamped = false;  // n_bar_p estimate was negative and clamped
};

double atom_presence_probability(double n_bar_p, double n_bar_n);

// n_bar_n = 2 * i_noise * tau_pump; n_bar_p = 2 * integral over the pump
// window of (pulse-averaged rate - i_noise), clamped at zero.
std::pair<double, double> mean_counts_per_pulse(
    const PulseAveragedRate& rates, double i_noise, double tau_pump_s);

ConditioningStats make_conditioning_stats(const PulseAveragedRate& rates,
                                          double i_noise, double tau_pump_s,
                                          double eta);

// Pulse-to-pulse conditioned correlation. Pairs (i, i + delta_i) are valid
// only when both triggers fall in the same cycle; the sum is normalized by
// the number of valid pairs.
struct ConditionalG2 {
  std::vector<std::int32_t> delta;     // lag in selected-series index
  std::vector<double> g2;
  std::vector<double> sigma;           // shot-noise error, g2/sqrt(n_e)
  std::vector<std::int64_t> n_events;  // raw pair sum per lag
  std::vector<std::int64_t> n_valid;   // valid (i, i+delta) pairs per lag
  std::vector<std::uint8_t> sigma_defined;

  std::size_t index_of(std::int32_t delta_i) const;
};

ConditionalG2 conditional_g2(const SelectedSeries& series,
                             std::int32_t delta_range);

// sigma per lag from the raw event counts: g2/sqrt(n_e); flagged undefined
// when n_e = 0.
std::vector<double> g2_error_bars(const std::vector<double>& g2,
                                  const std::vector<std::int64_t>& n_events,
                                  std::vector<std::uint8_t>* defined);

// Corrected conditional emission probabilities around the trigger pulse.
// Unbiased; values may be negative on noise-only data.
struct PBarSeries {
  std::vector<std::int32_t> delta_k;
  std::vector<double> p_bar;
  std::vector<double> sigma;          // sample-std / sqrt(N), same scaling
  std::vector<std::int64_t> n_valid;
};

PBarSeries conditional_emission_probability(const PulseCounts& pulses,
                                            const SelectedSeries& series,
                                            const ConditioningStats& stats,
                                            std::int32_t delta_k_range);

}  // namespace cqed
