#include "cqed/master_equation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqed {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

StateMatrix LindbladGenerator::apply(const StateMatrix& rho) const {
  // H is sparse: diagonal delta on |e,0>, omega_half on u<->e, g_eff on
  // e<->g1. Work out H*rho and rho*H row-wise instead of a dense product.
  StateMatrix h_rho = StateMatrix::Zero();
  h_rho.row(kU0) = omega_half * rho.row(kE0);
  h_rho.row(kE0) =
      omega_half * rho.row(kU0) + delta * rho.row(kE0) + g_eff * rho.row(kG1);
  h_rho.row(kG1) = g_eff * rho.row(kE0);

  StateMatrix out = -kI * (h_rho - h_rho.adjoint());

  // Cavity decay |g,1> -> |g,0> at rate 2*kappa.
  out(kG0, kG0) += kappa2 * rho(kG1, kG1);
  // Spontaneous emission |e,0> -> sink at rate 2*gamma_perp.
  out(kSink, kSink) += gamma2 * rho(kE0, kE0);

  // Anticommutator part -1/2 {L^dag L, rho} damps the g1 and e rows/columns.
  out.row(kG1) -= (0.5 * kappa2) * rho.row(kG1);
  out.col(kG1) -= (0.5 * kappa2) * rho.col(kG1);
  out.row(kE0) -= (0.5 * gamma2) * rho.row(kE0);
  out.col(kE0) -= (0.5 * gamma2) * rho.col(kE0);
  return out;
}

LindbladGenerator build_generator(const CavityQedParams& params, double g_eff,
                                  double t) {
  params.validate();
  if (g_eff < 0)
    throw std::invalid_argument("build_generator: g_eff must be >= 0");
  if (t < 0 || t > params.tau_pump)
    throw std::invalid_argument("build_generator: t outside the pump pulse");

  const double scale = params.g_max > 0 ? g_eff / params.g_max : 0.0;
  LindbladGenerator gen;
  gen.omega_half = 0.5 * params.omega_max * (t / params.tau_pump) * scale;
  gen.g_eff = g_eff;
  gen.delta = params.delta;
  gen.kappa2 = 2.0 * params.kappa;
  gen.gamma2 = 2.0 * params.gamma_perp;
  return gen;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 4th-order weights for the embedded error estimate.
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

struct Derivative {
  const CavityQedParams* params;
  double g_eff;
  double scale;  // g_eff / g_max, shared pump/cavity mode overlap

  StateMatrix operator()(double t, const StateMatrix& rho) const {
    LindbladGenerator gen;
    gen.omega_half =
        0.5 * params->omega_max * (t / params->tau_pump) * scale;
    gen.g_eff = g_eff;
    gen.delta = params->delta;
    gen.kappa2 = 2.0 * params->kappa;
    gen.gamma2 = 2.0 * params->gamma_perp;
    return gen.apply(rho);
  }
};

void check_state(const DensityMatrix& d, double t) {
  if (std::abs(d.total_trace() - 1.0) > 1e-8)
    throw std::runtime_error("master equation: trace drifted at t=" +
                             std::to_string(t));
  if (d.hermiticity_error() > 1e-10)
    throw std::runtime_error("master equation: hermiticity lost at t=" +
                             std::to_string(t));
  if (d.min_eigenvalue() < -1e-8)
    throw std::runtime_error("master equation: negative population at t=" +
                             std::to_string(t));
}

}  // namespace

PulseOutcome evolve_pump_pulse(const CavityQedParams& params, double g_eff,
                               const IntegratorOptions& opts) {
  params.validate();
  if (g_eff < 0)
    throw std::invalid_argument("evolve_pump_pulse: g_eff must be >= 0");
  if (opts.profile_points < 2)
    throw std::invalid_argument("evolve_pump_pulse: need >= 2 profile points");

  const Derivative rhs{&params, g_eff,
                       params.g_max > 0 ? g_eff / params.g_max : 0.0};
  const double t_end = params.tau_pump;
  const double dt_grid = t_end / (opts.profile_points - 1);

  PulseOutcome out;
  out.profile.time.resize(opts.profile_points);
  out.profile.rate.resize(opts.profile_points);

  StateMatrix rho = DensityMatrix::initial_u0().rho;
  StateMatrix k1 = rhs(0.0, rho);  // FSAL: reused across accepted steps

  double t = 0.0;
  double h = std::min(opts.h_initial, dt_grid);
  int grid_next = 0;

  auto record_grid_point = [&](int idx, const StateMatrix& r) {
    out.profile.time[idx] = idx * dt_grid;
    out.profile.rate[idx] =
        std::max(0.0, 2.0 * params.kappa * r(kG1, kG1).real());
    if (opts.check_invariants) {
      DensityMatrix d;
      d.rho = r;
      check_state(d, idx * dt_grid);
    }
  };
  record_grid_point(grid_next++, rho);

  while (t < t_end) {
    // Land exactly on output grid points and the pulse end.
    const double t_stop = std::min(grid_next * dt_grid, t_end);
    if (h > t_stop - t) h = t_stop - t;

    const StateMatrix k2 = rhs(t + c2 * h, rho + h * (a21 * k1));
    const StateMatrix k3 = rhs(t + c3 * h, rho + h * (a31 * k1 + a32 * k2));
    const StateMatrix k4 =
        rhs(t + c4 * h, rho + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const StateMatrix k5 = rhs(
        t + c5 * h, rho + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const StateMatrix k6 =
        rhs(t + h,
            rho + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const StateMatrix y5 =
        rho + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const StateMatrix k7 = rhs(t + h, y5);
    const StateMatrix y4 =
        rho +
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double err = (y5 - y4).cwiseAbs().maxCoeff();
    if (err <= opts.abs_tol) {
      t += h;
      rho = y5;
      k1 = k7;
      while (grid_next < opts.profile_points &&
             grid_next * dt_grid <= t + 1e-6 * dt_grid) {
        record_grid_point(grid_next++, rho);
      }
    }

    // Standard PI-free step-size update with safety factor.
    const double shrink =
        err > 0 ? 0.9 * std::pow(opts.abs_tol / err, 0.2) : 5.0;
    h *= std::clamp(shrink, 0.2, 5.0);
    if (h < opts.h_min)
      throw std::runtime_error(
          "evolve_pump_pulse: step size underflow (non-convergence)");
  }
  while (grid_next < opts.profile_points) record_grid_point(grid_next++, rho);

  // Trapezoidal integral of the escape rate.
  double total = 0.0;
  for (int i = 1; i < opts.profile_points; ++i)
    total += 0.5 * (out.profile.rate[i - 1] + out.profile.rate[i]) * dt_grid;
  out.profile.total_probability = std::clamp(total, 0.0, 1.0);

  out.final_state.rho = rho;
  out.p_emit = out.profile.total_probability;
  out.p_remain_u = std::clamp(rho(kU0, kU0).real(), 0.0, 1.0);
  return out;
}

double emission_probability(const CavityQedParams& params, double g_eff,
                            const IntegratorOptions& opts) {
  return evolve_pump_pulse(params, g_eff, opts).profile.total_probability;
}

EfficiencyTable EfficiencyTable::build(const CavityQedParams& params,
                                       int n_grid,
                                       const IntegratorOptions& opts) {
  params.validate();
  if (n_grid < 2)
    throw std::invalid_argument("EfficiencyTable: n_grid must be >= 2");

  EfficiencyTable table;
  table.g_max_ = params.g_max;
  table.tau_pump_ = params.tau_pump;
  table.dg_ = params.g_max / (n_grid - 1);
  table.entries_.resize(n_grid);

  for (int i = 0; i < n_grid; ++i) {
    const double g = params.g_max * i / (n_grid - 1);
    PulseOutcome pulse = evolve_pump_pulse(params, g, opts);
    if (i == 0) table.time_grid_ = pulse.profile.time;

    Entry& e = table.entries_[i];
    e.g_eff = g;
    e.p_emit = pulse.p_emit;
    e.p_remain_u = pulse.p_remain_u;
    e.rate = std::move(pulse.profile.rate);

    // Cumulative distribution of the emission time, normalized to 1.
    e.cdf.resize(e.rate.size());
    double acc = 0.0;
    e.cdf[0] = 0.0;
    const double dt = table.tau_pump_ / (e.rate.size() - 1);
    for (std::size_t j = 1; j < e.rate.size(); ++j) {
      acc += 0.5 * (e.rate[j - 1] + e.rate[j]) * dt;
      e.cdf[j] = acc;
    }
    if (acc > 0)
      for (double& c : e.cdf) c /= acc;
  }
  return table;
}

double EfficiencyTable::probability(double g_eff) const {
  const double g = std::clamp(g_eff, 0.0, g_max_);
  const std::size_t i = std::min(
      entries_.size() - 2, static_cast<std::size_t>(g / dg_));
  const double frac = (g - entries_[i].g_eff) / dg_;
  return entries_[i].p_emit +
         frac * (entries_[i + 1].p_emit - entries_[i].p_emit);
}

double EfficiencyTable::remain_u_probability(double g_eff) const {
  const double g = std::clamp(g_eff, 0.0, g_max_);
  const std::size_t i = std::min(
      entries_.size() - 2, static_cast<std::size_t>(g / dg_));
  const double frac = (g - entries_[i].g_eff) / dg_;
  return entries_[i].p_remain_u +
         frac * (entries_[i + 1].p_remain_u - entries_[i].p_remain_u);
}

double EfficiencyTable::sample_emission_time(double g_eff, double u) const {
  const double g = std::clamp(g_eff, 0.0, g_max_);
  const std::size_t i = std::min(
      entries_.size() - 1,
      static_cast<std::size_t>(g / dg_ + 0.5));  // nearest profile
  const std::vector<double>& cdf = entries_[i].cdf;
  if (cdf.empty() || cdf.back() <= 0.0) return 0.5 * tau_pump_;

  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const std::size_t hi =
      std::min(cdf.size() - 1,
               static_cast<std::size_t>(std::distance(cdf.begin(), it)));
  if (hi == 0) return 0.0;
  const double dt = tau_pump_ / (cdf.size() - 1);
  const double span = cdf[hi] - cdf[hi - 1];
  const double frac = span > 0 ? (u - cdf[hi - 1]) / span : 0.0;
  return ((hi - 1) + frac) * dt;
}

}  // namespace cqed
