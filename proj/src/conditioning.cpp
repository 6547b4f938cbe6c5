#include "cqed/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqed {

namespace {
const PulseCounts::Entry* find_entry(const PulseCounts& pulses,
                                     std::int64_t k) {
  auto it = std::lower_bound(
      pulses.entries.begin(), pulses.entries.end(), k,
      [](const PulseCounts::Entry& e, std::int64_t key) { return e.k < key; });
  if (it == pulses.entries.end() || it->k != k) return nullptr;
  return &*it;
}
}  // namespace

std::int32_t PulseCounts::n(std::int64_t k) const {
  const Entry* e = find_entry(*this, k);
  return e ? e->n() : 0;
}
std::int32_t PulseCounts::n1(std::int64_t k) const {
  const Entry* e = find_entry(*this, k);
  return e ? e->n1 : 0;
}
std::int32_t PulseCounts::n2(std::int64_t k) const {
  const Entry* e = find_entry(*this, k);
  return e ? e->n2 : 0;
}

PulseCounts bin_clicks_to_pulses(const ClickStream& stream) {
  PulseCounts out;
  out.pulses_per_cycle = stream.pulses_per_cycle;
  out.n_cycles = stream.cycles;

  for (const ClickRecord& c : stream.clicks) {
    const std::int64_t phase = c.timestamp_ns % stream.tau_period_ns;
    if (phase >= stream.tau_pump_ns) continue;  // recycle interval: ignored
    const std::int64_t k =
        c.cycle_id * stream.pulses_per_cycle +
        c.timestamp_ns / stream.tau_period_ns;
    if (out.entries.empty() || out.entries.back().k != k)
      out.entries.push_back({k, 0, 0});
    ++(c.detector == 1 ? out.entries.back().n1 : out.entries.back().n2);
    ++out.total_pump_clicks;
  }
  // Input records are sorted by (cycle, timestamp), so entries are sorted
  // by construction.
  return out;
}

double SelectedSeries::mean_m1() const {
  if (m1.empty()) return 0.0;
  double acc = 0.0;
  for (const std::int32_t v : m1) acc += v;
  return acc / static_cast<double>(m1.size());
}

double SelectedSeries::mean_m2() const {
  if (m2.empty()) return 0.0;
  double acc = 0.0;
  for (const std::int32_t v : m2) acc += v;
  return acc / static_cast<double>(m2.size());
}

SelectedSeries select_triggered(const PulseCounts& pulses) {
  SelectedSeries series;
  series.pulses_per_cycle = pulses.pulses_per_cycle;

  for (std::size_t i = 0; i < pulses.entries.size(); ++i) {
    const PulseCounts::Entry& e = pulses.entries[i];
    if (e.n() <= 0) continue;
    // Last pump pulse of its cycle has no follow-up interval.
    if ((e.k + 1) % pulses.pulses_per_cycle == 0) continue;

    series.trigger_k.push_back(e.k);
    std::int32_t f1 = 0, f2 = 0;
    if (i + 1 < pulses.entries.size() &&
        pulses.entries[i + 1].k == e.k + 1) {
      f1 = pulses.entries[i + 1].n1;
      f2 = pulses.entries[i + 1].n2;
    }
    series.m1.push_back(f1);
    series.m2.push_back(f2);
  }
  return series;
}

double atom_presence_probability(double n_bar_p, double n_bar_n) {
  if (n_bar_p < 0 || n_bar_n < 0)
    throw std::invalid_argument(
        "atom_presence_probability: negative mean counts");
  if (n_bar_p + n_bar_n <= 0)
    throw std::invalid_argument(
        "atom_presence_probability: n_bar_p + n_bar_n must be positive");
  return n_bar_p / (n_bar_p + n_bar_n);
}

std::pair<double, double> mean_counts_per_pulse(
    const PulseAveragedRate& rates, double i_noise, double tau_pump_s) {
  const double n_bar_n = 2.0 * i_noise * tau_pump_s;

  const std::vector<double> mean = rates.mean_profile();
  const double bin_s = static_cast<double>(rates.det1.phase_bin_ns) * 1e-9;
  const std::size_t pump_bins = static_cast<std::size_t>(
      std::llround(tau_pump_s / bin_s));
  if (pump_bins > mean.size())
    throw std::invalid_argument(
        "mean_counts_per_pulse: phase grid does not cover the pump window");

  double integral = 0.0;
  for (std::size_t b = 0; b < pump_bins; ++b)
    integral += (mean[b] - i_noise) * bin_s;
  const double n_bar_p = std::max(0.0, 2.0 * integral);
  return {n_bar_p, n_bar_n};
}

ConditioningStats make_conditioning_stats(const PulseAveragedRate& rates,
                                          double i_noise, double tau_pump_s,
                                          double eta) {
  ConditioningStats stats;
  const auto [n_bar_p, n_bar_n] =
      mean_counts_per_pulse(rates, i_noise, tau_pump_s);
  stats.n_bar_p = n_bar_p;
  stats.n_bar_n = n_bar_n;
  stats.clamped = n_bar_p == 0.0;
  stats.p_atom = atom_presence_probability(n_bar_p, n_bar_n);
  stats.eta = eta;
  return stats;
}

std::size_t ConditionalG2::index_of(std::int32_t delta_i) const {
  for (std::size_t i = 0; i < delta.size(); ++i)
    if (delta[i] == delta_i) return i;
  throw std::out_of_range("ConditionalG2: lag not computed");
}

std::vector<double> g2_error_bars(const std::vector<double>& g2,
                                  const std::vector<std::int64_t>& n_events,
                                  std::vector<std::uint8_t>* defined) {
  std::vector<double> sigma(g2.size(), 0.0);
  if (defined) defined->assign(g2.size(), 1);
  for (std::size_t i = 0; i < g2.size(); ++i) {
    if (n_events[i] > 0) {
      sigma[i] = g2[i] / std::sqrt(static_cast<double>(n_events[i]));
    } else {
      sigma[i] = 0.0;
      if (defined) (*defined)[i] = 0;
    }
  }
  return sigma;
}

ConditionalG2 conditional_g2(const SelectedSeries& series,
                             std::int32_t delta_range) {
  if (delta_range < 0)
    throw std::invalid_argument("conditional_g2: delta_range must be >= 0");
  const double denom = series.mean_m1() * series.mean_m2();
  if (denom <= 0)
    throw std::invalid_argument(
        "conditional_g2: no follow-up photons on one detector");

  const auto m = static_cast<std::int64_t>(series.size());
  ConditionalG2 out;
  for (std::int32_t d = -delta_range; d <= delta_range; ++d) {
    std::int64_t pair_sum = 0;
    std::int64_t valid = 0;
    for (std::int64_t i = 0; i < m; ++i) {
      const std::int64_t j = i + d;
      if (j < 0 || j >= m) continue;
      // Correlations never cross cycle boundaries.
      if (series.trigger_k[static_cast<std::size_t>(i)] /
              series.pulses_per_cycle !=
          series.trigger_k[static_cast<std::size_t>(j)] /
              series.pulses_per_cycle)
        continue;
      ++valid;
      pair_sum +=
          static_cast<std::int64_t>(series.m1[static_cast<std::size_t>(i)]) *
          static_cast<std::int64_t>(series.m2[static_cast<std::size_t>(j)]);
    }
    out.delta.push_back(d);
    out.n_events.push_back(pair_sum);
    out.n_valid.push_back(valid);
    out.g2.push_back(valid > 0
                         ? static_cast<double>(pair_sum) /
                               (static_cast<double>(valid) * denom)
                         : 0.0);
  }
  out.sigma = g2_error_bars(out.g2, out.n_events, &out.sigma_defined);
  return out;
}

PBarSeries conditional_emission_probability(const PulseCounts& pulses,
                                            const SelectedSeries& series,
                                            const ConditioningStats& stats,
                                            std::int32_t delta_k_range) {
  if (stats.eta <= 0)
    throw std::invalid_argument(
        "conditional_emission_probability: eta must be positive");
  if (stats.p_atom <= 0)
    throw std::invalid_argument(
        "conditional_emission_probability: p_atom must be positive");
  if (series.size() == 0)
    throw std::invalid_argument(
        "conditional_emission_probability: no triggers selected");

  const double prefactor = 1.0 / (stats.eta * stats.p_atom);
  const double background = stats.n_bar_n + stats.n_bar_p;

  PBarSeries out;
  for (std::int32_t d = -delta_k_range; d <= delta_k_range; ++d) {
    double sum = 0.0, sum_sq = 0.0;
    std::int64_t valid = 0;
    for (const std::int64_t k : series.trigger_k) {
      const std::int64_t target = k + d;
      if (target < 0 || target >= pulses.total_pulses()) continue;
      if (pulses.cycle_of(target) != pulses.cycle_of(k)) continue;
      ++valid;
      const double term = static_cast<double>(pulses.n(target)) - background -
                          (d == 0 ? 1.0 : 0.0);
      sum += term;
      sum_sq += term * term;
    }
    out.delta_k.push_back(d);
    out.n_valid.push_back(valid);
    if (valid > 0) {
      const double mean = sum / static_cast<double>(valid);
      out.p_bar.push_back(prefactor * mean);
      const double var =
          valid > 1
              ? (sum_sq - static_cast<double>(valid) * mean * mean) /
                    static_cast<double>(valid - 1)
              : 0.0;
      out.sigma.push_back(prefactor *
                          std::sqrt(std::max(0.0, var) /
                                    static_cast<double>(valid)));
    } else {
      out.p_bar.push_back(0.0);
      out.sigma.push_back(0.0);
    }
  }
  return out;
}

}  // namespace cqed
