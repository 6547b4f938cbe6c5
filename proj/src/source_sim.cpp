#include "cqed/source_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace cqed {

namespace {

// Transit window half-width in units of w/v. Beyond this the coupling
// factor is exp(-7.5625) ~ 5e-4 and the emission probability is negligible.
constexpr double kTransitCutSigmas = 2.75;

struct TaggedClick {
  std::int64_t ts_ns;
  std::int32_t detector;
  std::int32_t atom;
};

}  // namespace

double coupling_at(const AtomTransit& transit, const AtomFluxConfig& flux,
                   double g_max, double t) {
  const double fall = flux.velocity * (t - transit.t_center) / flux.waist;
  const double off = transit.impact_y / flux.waist;
  return g_max * std::exp(-fall * fall) * std::exp(-off * off) *
         transit.antinode_factor;
}

std::vector<AtomTransit> sample_atom_transits(const AtomFluxConfig& flux,
                                              const PulseSchedule& schedule,
                                              CycleRng& rng) {
  const double window = schedule.cycle_window();
  const std::int64_t n = rng.poisson(flux.rate_lambda * window);

  std::vector<AtomTransit> transits(static_cast<std::size_t>(n));
  for (AtomTransit& a : transits) {
    a.t_center = rng.uniform(0.0, window);
    do {
      a.impact_y = 0.5 * flux.waist * rng.gaussian();
    } while (std::abs(a.impact_y) > 2.0 * flux.waist);
    a.antinode_factor = std::abs(std::cos(rng.uniform(0.0, M_PI)));
  }
  return transits;
}

CycleResult simulate_cycle_with_transits(const SimConfig& config,
                                         const EfficiencyTable& table,
                                         std::vector<AtomTransit> transits,
                                         CycleRng& rng,
                                         std::int64_t cycle_id) {
  const PulseSchedule& sched = config.schedule;
  const DetectorModel& det = config.detector;
  const double period = sched.tau_period();
  const std::int64_t period_ns = sched.tau_period_ns();
  const std::int64_t pump_ns = sched.tau_pump_ns();
  const std::int64_t window_ns = sched.cycle_window_ns();
  const double p_detect =
      config.cavity.escape_fraction * det.path_efficiency * det.qe;

  CycleResult result;
  std::vector<TaggedClick> tagged;

  // Dark counts: one homogeneous Poisson stream per detector over the
  // full cycle window.
  for (std::int32_t d = 1; d <= 2; ++d) {
    if (det.dark_rate <= 0) continue;
    double t = rng.exponential(det.dark_rate);
    while (t < sched.cycle_window()) {
      const auto ts = static_cast<std::int64_t>(t * 1e9);
      if (ts < window_ns) tagged.push_back({ts, d, -1});
      t += rng.exponential(det.dark_rate);
    }
  }

  // Per-atom pulse-to-pulse state machine. The atom arrives in |u>; after
  // an emission (or a pulse that dumped it out of |u> without a photon) it
  // needs a successful recycle interval before it can emit again.
  const double cut = kTransitCutSigmas * config.flux.waist /
                     config.flux.velocity;
  for (std::size_t atom = 0; atom < transits.size(); ++atom) {
    const AtomTransit& tr = transits[atom];
    const double mid_offset = 0.5 * sched.tau_pump;
    auto first = static_cast<std::int64_t>(
        std::ceil((tr.t_center - cut - mid_offset) / period));
    auto last = static_cast<std::int64_t>(
        std::floor((tr.t_center + cut - mid_offset) / period));
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last, sched.pulses_per_cycle - 1);

    bool in_u = true;
    for (std::int64_t k = first; k <= last; ++k) {
      const double t_mid = k * period + mid_offset;
      const double g = coupling_at(tr, config.flux, config.cavity.g_max,
                                   t_mid);
      std::int64_t photons = 0;
      if (in_u) {
        const double p_emit = table.probability(g);
        if (config.classical_source) {
          photons = rng.poisson(p_emit);
        } else {
          photons = rng.uniform() < p_emit ? 1 : 0;
        }
        for (std::int64_t p = 0; p < photons; ++p) {
          const double t_em = table.sample_emission_time(g, rng.uniform());
          const bool detected = rng.uniform() < p_detect;
          const std::int32_t which =
              rng.uniform() < det.splitter_ratio ? 1 : 2;
          if (detected) {
            auto ts = k * period_ns +
                      std::min<std::int64_t>(
                          static_cast<std::int64_t>(t_em * 1e9), pump_ns - 1);
            tagged.push_back({ts, which, static_cast<std::int32_t>(atom)});
          }
        }
        if (photons > 0) {
          in_u = false;
        } else {
          // No photon: the pulse either left the atom in |u> or lost it to
          // spontaneous emission; conditional split from the solved pulse.
          const double p_u = table.remain_u_probability(g);
          const double p_stay =
              p_emit < 1.0 ? std::min(1.0, p_u / (1.0 - p_emit)) : 0.0;
          if (rng.uniform() >= p_stay) in_u = false;
        }
      }
      result.truth.push_back({cycle_id, static_cast<std::int32_t>(k),
                              static_cast<std::int32_t>(atom),
                              static_cast<std::uint8_t>(photons > 0)});
      if (!in_u && rng.uniform() < config.flux.recycle_success) in_u = true;
    }
  }

  std::sort(tagged.begin(), tagged.end(), [](const TaggedClick& a,
                                             const TaggedClick& b) {
    if (a.ts_ns != b.ts_ns) return a.ts_ns < b.ts_ns;
    if (a.detector != b.detector) return a.detector < b.detector;
    return a.atom < b.atom;
  });

  result.clicks.reserve(tagged.size());
  result.click_atom.reserve(tagged.size());
  for (const TaggedClick& c : tagged) {
    result.clicks.push_back({cycle_id, c.detector, c.ts_ns});
    result.click_atom.push_back(c.atom);
  }
  result.transits = std::move(transits);
  return result;
}

CycleResult simulate_cycle(const SimConfig& config,
                           const EfficiencyTable& table, CycleRng& rng,
                           std::int64_t cycle_id) {
  std::vector<AtomTransit> transits =
      sample_atom_transits(config.flux, config.schedule, rng);
  return simulate_cycle_with_transits(config, table, std::move(transits),
                                      rng, cycle_id);
}

SimOutput run_experiment(const SimConfig& config, std::int64_t n_cycles,
                         std::uint64_t seed, const EfficiencyTable& table,
                         int n_threads) {
  config.validate();
  if (n_cycles < 1)
    throw std::invalid_argument("run_experiment: n_cycles must be >= 1");

  if (n_threads <= 0) {
    if (const char* env = std::getenv("CQED_THREADS"))
      n_threads = std::max(1, std::atoi(env));
    else
      n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads <= 0) n_threads = 1;
  }
  n_threads = static_cast<int>(
      std::min<std::int64_t>(n_threads, n_cycles));

  std::vector<CycleResult> per_cycle(static_cast<std::size_t>(n_cycles));
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n_cycles) return;
      CycleRng rng(seed, static_cast<std::uint64_t>(i));
      per_cycle[static_cast<std::size_t>(i)] =
          simulate_cycle(config, table, rng, i);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SimOutput out;
  out.config = config;
  out.seed = seed;
  out.n_cycles = n_cycles;
  out.transits.reserve(per_cycle.size());
  for (CycleResult& c : per_cycle) {
    out.clicks.insert(out.clicks.end(), c.clicks.begin(), c.clicks.end());
    out.click_atom.insert(out.click_atom.end(), c.click_atom.begin(),
                          c.click_atom.end());
    out.truth.insert(out.truth.end(), c.truth.begin(), c.truth.end());
    out.transits.push_back(std::move(c.transits));
  }
  return out;
}

double measured_photon_rate(const SimOutput& out) {
  const double total_time =
      static_cast<double>(out.n_cycles) * out.config.schedule.cycle_window();
  const double i_bar =
      static_cast<double>(out.clicks.size()) / (2.0 * total_time);
  return i_bar - out.config.detector.dark_rate;
}

double calibrate_flux(double target_photon_rate, SimConfig config,
                      const EfficiencyTable& table,
                      const CalibrationOptions& opts) {
  if (target_photon_rate < 0)
    throw std::invalid_argument("calibrate_flux: target must be >= 0");
  if (target_photon_rate == 0.0) return 0.0;

  auto pilot = [&](double lambda) {
    config.flux.rate_lambda = lambda;
    SimOutput out =
        run_experiment(config, opts.pilot_cycles, opts.seed, table);
    return measured_photon_rate(out);
  };

  // Grow the upper bracket until the pilot overshoots the target.
  double lo = 0.0, hi = 500.0;
  double rate_hi = pilot(hi);
  while (rate_hi < target_photon_rate) {
    lo = hi;
    hi *= 2.0;
    if (hi > opts.lambda_cap)
      throw std::runtime_error(
          "calibrate_flux: target photon rate beyond saturation");
    rate_hi = pilot(hi);
  }

  double lambda = hi;
  for (int it = 0; it < opts.max_iterations; ++it) {
    lambda = 0.5 * (lo + hi);
    const double rate = pilot(lambda);
    if (std::abs(rate - target_photon_rate) <=
        opts.rel_tol * target_photon_rate)
      return lambda;
    (rate < target_photon_rate ? lo : hi) = lambda;
  }
  return lambda;
}

}  // namespace cqed
