#include "cqed/click_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqed {

ClickStream to_click_stream(const SimOutput& out) {
  ClickStream s;
  s.tau_period_ns = out.config.schedule.tau_period_ns();
  s.tau_pump_ns = out.config.schedule.tau_pump_ns();
  s.pulses_per_cycle = out.config.schedule.pulses_per_cycle;
  s.cycles = out.n_cycles;
  s.seed = out.seed;
  s.clicks = out.clicks;
  return s;
}

RateSummary summarize_rates(const ClickStream& stream, double dark_rate) {
  if (stream.clicks.empty())
    throw std::invalid_argument("summarize_rates: empty click stream");
  if (stream.total_time_s() <= 0)
    throw std::invalid_argument("summarize_rates: no observation time");

  RateSummary s;
  s.i_bar = static_cast<double>(stream.clicks.size()) /
            (2.0 * stream.total_time_s());
  s.i_noise = dark_rate;
  s.i_photon = s.i_bar - s.i_noise;
  if (s.i_photon < 0) {
    s.i_photon = 0.0;
    s.clamped = true;
  }
  return s;
}

CorrelationHistogram g2_histogram(const ClickStream& stream,
                                  std::int64_t bin_width_ns,
                                  std::int64_t lag_range_ns) {
  if (bin_width_ns <= 0)
    throw std::invalid_argument("g2_histogram: bin width must be positive");
  if (lag_range_ns >= stream.cycle_window_ns())
    throw std::invalid_argument("g2_histogram: lag range >= cycle window");

  CorrelationHistogram hist;
  hist.bin_width_ns = bin_width_ns;
  hist.lag_min_ns = -lag_range_ns;
  const std::size_t n_bins =
      static_cast<std::size_t>((2 * lag_range_ns) / bin_width_ns);
  if (n_bins == 0)
    throw std::invalid_argument("g2_histogram: lag range below one bin");
  hist.raw.assign(n_bins, 0);

  const std::int64_t lag_max = hist.lag_min_ns +
                               static_cast<std::int64_t>(n_bins) *
                                   bin_width_ns;

  std::size_t n1_total = 0, n2_total = 0;
  double norm = 0.0;

  // Cycles are contiguous blocks in the sorted record stream.
  std::size_t begin = 0;
  std::vector<std::int64_t> t1, t2;
  while (begin < stream.clicks.size()) {
    const std::int64_t cycle = stream.clicks[begin].cycle_id;
    std::size_t end = begin;
    t1.clear();
    t2.clear();
    while (end < stream.clicks.size() &&
           stream.clicks[end].cycle_id == cycle) {
      (stream.clicks[end].detector == 1 ? t1 : t2)
          .push_back(stream.clicks[end].timestamp_ns);
      ++end;
    }
    n1_total += t1.size();
    n2_total += t2.size();
    norm += static_cast<double>(t1.size()) * static_cast<double>(t2.size()) *
            static_cast<double>(bin_width_ns) /
            static_cast<double>(stream.cycle_window_ns());

    // Ordered pairs (t1, t2) with t2 - t1 inside the lag window; both
    // lists are sorted, so walk a sliding window.
    std::size_t lo = 0, hi = 0;
    for (const std::int64_t a : t1) {
      while (lo < t2.size() && t2[lo] - a < hist.lag_min_ns) ++lo;
      while (hi < t2.size() && t2[hi] - a < lag_max) ++hi;
      for (std::size_t j = lo; j < hi; ++j) {
        const std::size_t b = static_cast<std::size_t>(
            (t2[j] - a - hist.lag_min_ns) / bin_width_ns);
        ++hist.raw[b];
      }
    }
    begin = end;
  }

  if (n1_total == 0 || n2_total == 0)
    throw std::invalid_argument("g2_histogram: a detector stream is empty");

  hist.normalization.assign(n_bins, norm);
  return hist;
}

double PhaseProfile::mean_rate() const {
  if (counts.empty() || n_periods == 0) return 0.0;
  std::int64_t total = 0;
  for (const std::int64_t c : counts) total += c;
  return static_cast<double>(total) /
         (static_cast<double>(n_periods) * static_cast<double>(period_ns) *
          1e-9);
}

std::vector<double> PulseAveragedRate::mean_profile() const {
  std::vector<double> mean(det1.rate.size());
  for (std::size_t i = 0; i < mean.size(); ++i)
    mean[i] = 0.5 * (det1.rate[i] + det2.rate[i]);
  return mean;
}

PulseAveragedRate pulse_averaged_rate(const ClickStream& stream,
                                      std::int64_t phase_bin_ns) {
  if (stream.clicks.empty())
    throw std::invalid_argument("pulse_averaged_rate: empty click stream");
  if (phase_bin_ns <= 0 || stream.tau_period_ns % phase_bin_ns != 0)
    throw std::invalid_argument(
        "pulse_averaged_rate: phase bin must divide the period");

  const std::size_t n_bins =
      static_cast<std::size_t>(stream.tau_period_ns / phase_bin_ns);
  const std::int64_t n_periods = stream.cycles * stream.pulses_per_cycle;

  PulseAveragedRate out;
  for (PhaseProfile* p : {&out.det1, &out.det2}) {
    p->phase_bin_ns = phase_bin_ns;
    p->period_ns = stream.tau_period_ns;
    p->n_periods = n_periods;
    p->counts.assign(n_bins, 0);
    p->rate.assign(n_bins, 0.0);
  }

  for (const ClickRecord& c : stream.clicks) {
    const std::int64_t phase = c.timestamp_ns % stream.tau_period_ns;
    const std::size_t b = static_cast<std::size_t>(phase / phase_bin_ns);
    ++(c.detector == 1 ? out.det1 : out.det2).counts[b];
  }

  const double bin_s = static_cast<double>(phase_bin_ns) * 1e-9;
  for (PhaseProfile* p : {&out.det1, &out.det2})
    for (std::size_t b = 0; b < n_bins; ++b)
      p->rate[b] = static_cast<double>(p->counts[b]) /
                   (static_cast<double>(n_periods) * bin_s);
  return out;
}

BackgroundCorrelation background_correlation(const PhaseProfile& rate1,
                                             const PhaseProfile& rate2) {
  if (rate1.rate.size() != rate2.rate.size() ||
      rate1.phase_bin_ns != rate2.phase_bin_ns)
    throw std::invalid_argument(
        "background_correlation: profiles on different phase grids");
  const double mean1 = rate1.mean_rate();
  const double mean2 = rate2.mean_rate();
  if (mean1 <= 0 || mean2 <= 0)
    throw std::invalid_argument("background_correlation: zero mean rate");

  const std::size_t n = rate1.rate.size();
  BackgroundCorrelation bg;
  bg.phase_bin_ns = rate1.phase_bin_ns;
  bg.period_ns = rate1.period_ns;
  bg.g2.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += rate1.rate[i] * rate2.rate[(i + j) % n];
    bg.g2[j] = acc / (static_cast<double>(n) * mean1 * mean2);
  }
  bg.g2_min = *std::min_element(bg.g2.begin(), bg.g2.end());
  bg.g2_max = *std::max_element(bg.g2.begin(), bg.g2.end());
  return bg;
}

double BackgroundCorrelation::at(double tau_ns) const {
  const double period = static_cast<double>(period_ns);
  double phase = std::fmod(tau_ns, period);
  if (phase < 0) phase += period;
  const double x = phase / static_cast<double>(phase_bin_ns);
  const std::size_t i = static_cast<std::size_t>(x) % g2.size();
  const std::size_t j = (i + 1) % g2.size();
  const double frac = x - std::floor(x);
  return g2[i] + frac * (g2[j] - g2[i]);
}

double BackgroundCorrelation::bin_average(double lo_ns, double hi_ns) const {
  const int steps = 16;
  const double dt = (hi_ns - lo_ns) / steps;
  double acc = 0.0;
  for (int s = 0; s < steps; ++s) acc += at(lo_ns + (s + 0.5) * dt);
  return acc / steps;
}

namespace {
double photon_fraction_sq(const RateSummary& rates) {
  if (rates.i_bar <= 0)
    throw std::invalid_argument("estimators: i_bar must be positive");
  const double f = rates.i_photon / rates.i_bar;
  return f * f;
}
}  // namespace

double noise_floor(const RateSummary& rates) {
  return 1.0 - photon_fraction_sq(rates);
}

std::pair<double, double> photon_pair_extrema(const RateSummary& rates) {
  return {0.0, 2.0 * photon_fraction_sq(rates)};
}

std::pair<double, double> estimator_extrema(const RateSummary& rates) {
  const double f2 = photon_fraction_sq(rates);
  return {1.0 - f2, 1.0 + f2};
}

}  // namespace cqed
