#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "cqed/params.hpp"

namespace cqed {

// State indices of the single-excitation manifold plus the uncoupled
// ground state. Spontaneous emission from |e,0> leaves this manifold; it
// is tracked as a fifth absorbing "sink" population so that the full
// evolution stays trace-preserving.
enum StateIndex { kU0 = 0, kE0 = 1, kG1 = 2, kG0 = 3, kSink = 4 };

using StateMatrix = Eigen::Matrix<std::complex<double>, 5, 5>;

// Density matrix over {|u,0>, |e,0>, |g,1>, |g,0>} plus the
// spontaneous-emission sink.
struct DensityMatrix {
  StateMatrix rho = StateMatrix::Zero();

  static DensityMatrix initial_u0() {
    DensityMatrix d;
    d.rho(kU0, kU0) = 1.0;
    return d;
  }

  double population(int i) const { return rho(i, i).real(); }
  double sink_population() const { return rho(kSink, kSink).real(); }
  double total_trace() const { return rho.trace().real(); }

  // max |rho - rho^dagger| over all entries
  double hermiticity_error() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<StateMatrix> es(
        0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

// Instantaneous master-equation generator, frozen at one time within a
// pump pulse. The coherent part is the Lambda-system Hamiltonian in the
// Raman-resonant rotating frame (detuning on |e,0> only); the dissipative
// part holds the cavity decay |g,1> -> |g,0> at rate 2*kappa and the
// spontaneous decay of |e,0> at total rate 2*gamma_perp, split between
// |u,0> (branching spont_branch_u, ready to retry the transfer) and the
// sink (other ground states, dark until recycled).
//
// The pump Rabi frequency ramps linearly, Omega(t) = omega_max * t/tau_pump,
// and is scaled by g_eff/g_max together with the cavity coupling: the pump
// beam overlaps the cavity mode, so an atom that does not couple to the
// cavity does not see the pump either (this is what makes g_eff = 0 a fully
// decoupled atom).
struct LindbladGenerator {
  double omega_half = 0.0;  // Omega_eff(t)/2, u <-> e coupling
  double g_eff = 0.0;       // e <-> g1 coupling
  double delta = 0.0;       // detuning on |e,0>
  double kappa2 = 0.0;      // 2*kappa
  double gamma2 = 0.0;      // 2*gamma_perp

  // d(rho)/dt = -i[H, rho] + dissipators. Trace-free and
  // Hermiticity-preserving by construction.
  StateMatrix apply(const StateMatrix& rho) const;
};

LindbladGenerator build_generator(const CavityQedParams& params, double g_eff,
                                  double t);

// Instantaneous cavity photon escape rate 2*kappa*rho_g1g1 on a time grid
// within [0, tau_pump], and its integral.
struct EmissionProfile {
  std::vector<double> time;  // seconds
  std::vector<double> rate;  // 1/s
  double total_probability = 0.0;
};

struct PulseOutcome {
  EmissionProfile profile;
  DensityMatrix final_state;
  double p_emit = 0.0;      // = profile.total_probability
  double p_remain_u = 0.0;  // population left in |u,0> at pulse end
};

struct IntegratorOptions {
  double abs_tol = 1e-10;      // per component, per accepted step
  double h_initial = 1e-10;    // s
  double h_min = 1e-16;        // below this the step size has underflowed
  int profile_points = 2001;   // output grid over [0, tau_pump]
  bool check_invariants = true;
};

// Integrate one pump pulse from |u,0> with an adaptive embedded
// Runge-Kutta (Dormand-Prince 5(4)). Throws std::runtime_error on
// step-size underflow and std::invalid_argument on bad inputs.
PulseOutcome evolve_pump_pulse(const CavityQedParams& params, double g_eff,
                               const IntegratorOptions& opts = {});

// Scalar wrapper: total photon escape probability for one pulse.
double emission_probability(const CavityQedParams& params, double g_eff,
                            const IntegratorOptions& opts = {});

// Precomputed emission probabilities and profiles on a uniform g_eff grid
// over [0, g_max]. Immutable after construction; shared across simulation
// workers. Probabilities interpolate linearly; emission-time sampling uses
// the nearest grid profile.
class EfficiencyTable {
 public:
  struct Entry {
    double g_eff = 0.0;
    double p_emit = 0.0;
    double p_remain_u = 0.0;
    std::vector<double> rate;  // emission profile on the shared time grid
    std::vector<double> cdf;   // normalized cumulative emission distribution
  };

  static EfficiencyTable build(const CavityQedParams& params, int n_grid,
                               const IntegratorOptions& opts = {});

  double probability(double g_eff) const;
  double remain_u_probability(double g_eff) const;

  // Inverse-CDF draw of the emission time within the pulse; u in [0,1).
  double sample_emission_time(double g_eff, double u) const;

  const std::vector<Entry>& entries() const { return entries_; }
  const std::vector<double>& time_grid() const { return time_grid_; }
  double g_max() const { return g_max_; }
  double tau_pump() const { return tau_pump_; }

 private:
  std::vector<Entry> entries_;
  std::vector<double> time_grid_;
  double g_max_ = 0.0;
  double tau_pump_ = 0.0;
  double dg_ = 0.0;
};

}  // namespace cqed
