#pragma once

#include <cstdint>
#include <vector>

#include "cqed/master_equation.hpp"
#include "cqed/params.hpp"
#include "cqed/rng.hpp"

namespace cqed {

// One atom falling through the cavity mode.
struct AtomTransit {
  double t_center = 0.0;        // s, closest approach to the mode center
  double impact_y = 0.0;        // m, transverse offset
  double antinode_factor = 1.0; // |cos| of the axial standing-wave phase
};

// One detector event. Timestamps are integer nanoseconds from cycle start.
struct ClickRecord {
  std::int64_t cycle_id = 0;
  std::int32_t detector = 1;  // 1 or 2
  std::int64_t timestamp_ns = 0;
};

// Ground-truth emission flag for one (atom, pump pulse) combination within
// the atom's transit window.
struct TruthFlag {
  std::int64_t cycle_id = 0;
  std::int32_t pulse_index = 0;
  std::int32_t atom_id = 0;
  std::uint8_t emitted = 0;
};

struct CycleResult {
  std::vector<ClickRecord> clicks;
  // Parallel to clicks: atom id that produced the photon, -1 for dark counts.
  std::vector<std::int32_t> click_atom;
  std::vector<AtomTransit> transits;
  std::vector<TruthFlag> truth;
};

struct SimOutput {
  std::vector<ClickRecord> clicks;
  std::vector<std::int32_t> click_atom;
  std::vector<std::vector<AtomTransit>> transits;  // per cycle
  std::vector<TruthFlag> truth;
  SimConfig config;
  std::uint64_t seed = 0;
  std::int64_t n_cycles = 0;
};

// Gaussian TEM00 coupling seen by a transiting atom at time t.
double coupling_at(const AtomTransit& transit, const AtomFluxConfig& flux,
                   double g_max, double t);

// Poisson number of transits over the cycle window; t_center uniform,
// impact_y ~ N(0, w/2) truncated at 2w, antinode factor |cos(U[0,pi))|.
std::vector<AtomTransit> sample_atom_transits(const AtomFluxConfig& flux,
                                              const PulseSchedule& schedule,
                                              CycleRng& rng);

// One full pump/recycle cycle: per-pulse emission from each transiting
// atom (quasi-static coupling at the pulse midpoint), recycling, detection
// chain, dark counts. Clicks come back sorted by timestamp.
CycleResult simulate_cycle(const SimConfig& config,
                           const EfficiencyTable& table, CycleRng& rng,
                           std::int64_t cycle_id);

// Test hook: same cycle simulation with externally provided transits.
CycleResult simulate_cycle_with_transits(const SimConfig& config,
                                         const EfficiencyTable& table,
                                         std::vector<AtomTransit> transits,
                                         CycleRng& rng,
                                         std::int64_t cycle_id);

// n_cycles independent cycles with per-cycle random substreams keyed by
// (seed, cycle_id). Output is identical for any worker count.
SimOutput run_experiment(const SimConfig& config, std::int64_t n_cycles,
                         std::uint64_t seed, const EfficiencyTable& table,
                         int n_threads = 0);

// Photon count rate per detector above the dark rate, from a finished run.
double measured_photon_rate(const SimOutput& out);

struct CalibrationOptions {
  std::int64_t pilot_cycles = 1500;
  double rel_tol = 0.02;        // tighter than the 3% contract
  int max_iterations = 48;
  double lambda_cap = 2.0e5;    // atoms/s; beyond this we call it saturated
  std::uint64_t seed = 0xCA11B7A7E5EEDULL;
};

// Bisect the atom rate until short pilot runs reproduce the target photon
// rate per detector. Throws std::runtime_error if the target is not
// reachable below lambda_cap.
double calibrate_flux(double target_photon_rate, SimConfig config,
                      const EfficiencyTable& table,
                      const CalibrationOptions& opts = {});

}  // namespace cqed
