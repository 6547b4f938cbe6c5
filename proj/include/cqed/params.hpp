#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace cqed {

inline constexpr double kTwoPi = 2.0 * M_PI;

// Physical rates of the atom-cavity system and the pump pulse shape.
// All angular frequencies are in rad/s, durations in seconds.
struct CavityQedParams {
  double g_max = kTwoPi * 2.5e6;        // peak atom-cavity coupling
  double kappa = kTwoPi * 1.25e6;       // cavity field decay rate
  double gamma_perp = kTwoPi * 3.0e6;   // atomic polarisation decay rate
  double delta = -kTwoPi * 20.0e6;      // cavity/pump detuning
  double omega_max = kTwoPi * 8.0e6;    // peak pump Rabi frequency
  double tau_pump = 2.0e-6;             // pump pulse duration
  double escape_fraction = 0.9;         // photon exits via the output coupler
  // Fraction of the spontaneous decay from |e,0> that returns to |u,0>
  // and can retry the Raman transfer within the same pulse; the remainder
  // ends in other ground states and waits for the recycling laser. 5/9 is
  // the hyperfine branching of the 85Rb D2 F'=3 level.
  double spont_branch_u = 5.0 / 9.0;

  void validate() const {
    if (g_max < 0 || kappa < 0 || gamma_perp < 0 || omega_max < 0 ||
        tau_pump <= 0)
      throw std::invalid_argument("CavityQedParams: rates and tau_pump must be non-negative");
    if (escape_fraction < 0 || escape_fraction > 1)
      throw std::invalid_argument("CavityQedParams: escape_fraction outside [0,1]");
    if (spont_branch_u < 0 || spont_branch_u > 1)
      throw std::invalid_argument("CavityQedParams: spont_branch_u outside [0,1]");
  }
};

// Periodic pump/recycle timing grid. Pump interval of pulse k is
// [k*tau_period, k*tau_period + tau_pump).
struct PulseSchedule {
  double tau_pump = 2.0e-6;
  double tau_recycle = 2.0e-6;
  std::int64_t pulses_per_cycle = 2000;

  double tau_period() const { return tau_pump + tau_recycle; }
  double cycle_window() const { return pulses_per_cycle * tau_period(); }

  std::int64_t tau_pump_ns() const { return llround(tau_pump * 1e9); }
  std::int64_t tau_period_ns() const { return llround(tau_period() * 1e9); }
  std::int64_t cycle_window_ns() const {
    return pulses_per_cycle * tau_period_ns();
  }

  void validate() const {
    if (tau_pump <= 0 || tau_recycle <= 0)
      throw std::invalid_argument("PulseSchedule: tau_pump and tau_recycle must be positive");
    if (pulses_per_cycle < 1)
      throw std::invalid_argument("PulseSchedule: pulses_per_cycle must be >= 1");
  }
};

// Atom beam statistics and transit geometry.
struct AtomFluxConfig {
  double rate_lambda = 0.0;      // atoms/s entering the mode volume
  double velocity = 2.0;         // m/s, fall velocity
  double waist = 40e-6;          // m, transverse 1/e field radius
  double recycle_success = 0.7;  // per recycle interval

  void validate() const {
    if (rate_lambda < 0)
      throw std::invalid_argument("AtomFluxConfig: rate_lambda must be >= 0");
    if (velocity <= 0 || waist <= 0)
      throw std::invalid_argument("AtomFluxConfig: velocity and waist must be positive");
    if (recycle_success < 0 || recycle_success > 1)
      throw std::invalid_argument("AtomFluxConfig: recycle_success outside [0,1]");
  }
};

// Detection chain: beam splitter, photo diodes, dark counts.
struct DetectorModel {
  double qe = 0.5;               // per-diode quantum efficiency
  double path_efficiency = 0.72; // spatial filtering
  double splitter_ratio = 0.5;   // probability of routing to detector 1
  double dark_rate = 446.0;      // noise counts per second per detector

  // Overall quantum efficiency eta (photo diodes and spatial filtering).
  double overall_eta() const { return qe * path_efficiency; }

  void validate() const {
    if (qe < 0 || qe > 1 || path_efficiency < 0 || path_efficiency > 1 ||
        splitter_ratio < 0 || splitter_ratio > 1)
      throw std::invalid_argument("DetectorModel: efficiencies outside [0,1]");
    if (dark_rate < 0)
      throw std::invalid_argument("DetectorModel: dark_rate must be >= 0");
  }
};

// Everything a simulation run needs besides cycle count and seed.
struct SimConfig {
  CavityQedParams cavity;
  PulseSchedule schedule;
  AtomFluxConfig flux;
  DetectorModel detector;
  // Classical control source: per-pulse Poisson photon numbers of equal
  // mean instead of single-photon Bernoulli emissions.
  bool classical_source = false;

  void validate() const {
    cavity.validate();
    schedule.validate();
    flux.validate();
    detector.validate();
  }
};

}  // namespace cqed
