#pragma once

#include <cstdint>
#include <vector>

#include "cqed/click_stream.hpp"

namespace cqed {

// Mean count rates per detector; i_photon is the dark-rate-subtracted
// photon rate, clamped at zero (clamped flag set) if the noise estimate
// exceeds the total rate.
struct RateSummary {
  double i_bar = 0.0;
  double i_noise = 0.0;
  double i_photon = 0.0;
  bool clamped = false;
};

RateSummary summarize_rates(const ClickStream& stream, double dark_rate);

// Normalized cross-correlation histogram of the two detector streams.
// Pairs are formed only within one cycle; bin b covers lags
// [lag_min + b*bin_width, lag_min + (b+1)*bin_width).
struct CorrelationHistogram {
  std::int64_t bin_width_ns = 100;
  std::int64_t lag_min_ns = 0;
  std::vector<std::int64_t> raw;         // ordered pair counts per bin
  std::vector<double> normalization;     // expected pairs under uniform rates

  std::size_t bins() const { return raw.size(); }
  std::int64_t bin_center_ns(std::size_t b) const {
    return lag_min_ns + static_cast<std::int64_t>(b) * bin_width_ns +
           bin_width_ns / 2;
  }
  double g2(std::size_t b) const {
    return normalization[b] > 0 ? raw[b] / normalization[b] : 0.0;
  }
  // Shot-noise error of g2 in bin b; sqrt(raw)/norm, or 1/norm when empty.
  double sigma(std::size_t b) const {
    if (normalization[b] <= 0) return 0.0;
    return std::sqrt(static_cast<double>(raw[b] > 0 ? raw[b] : 1)) /
           normalization[b];
  }
};

CorrelationHistogram g2_histogram(const ClickStream& stream,
                                  std::int64_t bin_width_ns,
                                  std::int64_t lag_range_ns);

// Count rate of one detector folded modulo the drive period.
struct PhaseProfile {
  std::int64_t phase_bin_ns = 40;
  std::int64_t period_ns = 4000;
  std::int64_t n_periods = 0;
  std::vector<std::int64_t> counts;
  std::vector<double> rate;  // counts / (n_periods * bin width)

  double mean_rate() const;
};

struct PulseAveragedRate {
  PhaseProfile det1;
  PhaseProfile det2;

  // Average of the two detectors' folded rates (per detector, 1/s).
  std::vector<double> mean_profile() const;
};

PulseAveragedRate pulse_averaged_rate(const ClickStream& stream,
                                      std::int64_t phase_bin_ns = 40);

// Circular correlation of two folded rate profiles, normalized by the
// product of their means; the periodic different-atom + noise background
// of the g2 histogram.
struct BackgroundCorrelation {
  std::int64_t phase_bin_ns = 40;
  std::int64_t period_ns = 4000;
  std::vector<double> g2;  // one period, bin j = lag j*phase_bin_ns
  double g2_min = 0.0;
  double g2_max = 0.0;

  // Periodic lookup at an arbitrary lag (linear interpolation).
  double at(double tau_ns) const;
  // Mean of the curve over [lo_ns, hi_ns), for histogram-bin comparisons.
  double bin_average(double lo_ns, double hi_ns) const;
};

BackgroundCorrelation background_correlation(const PhaseProfile& rate1,
                                             const PhaseProfile& rate2);

// Analytic square-wave estimators from the mean rates alone.
double noise_floor(const RateSummary& rates);                      // g2_N
std::pair<double, double> photon_pair_extrema(const RateSummary&); // g2_P
std::pair<double, double> estimator_extrema(const RateSummary&);   // g2_E

}  // namespace cqed
