#pragma once

// Density-matrix propagation of the driven, modulated two-level sensor.
//
// Hamiltonian (lab frame, hbar = 1):
//   H(t) = 1/2 [omega_s + delta_s cos(omega_phi t + theta)] sigma_z
//          + Omega_1 cos(omega_1 t) sigma_x
// restricted to the {m_s=0, m_s=-1} subspace. Longitudinal relaxation at
// gamma1 acts through symmetric sigma+- channels (maximally mixed target),
// so an undriven population relaxes as 1/2 + 1/2 exp(-2 gamma1 t).
//
// Dephasing is modelled as spectral diffusion: the transition frequency
// carries an Ornstein-Uhlenbeck offset with stationary std gamma2 and
// correlation time bath_correlation_factor/gamma2. The bath is solved
// deterministically by discretizing the offset onto a uniform grid and
// evolving one conditional Bloch vector per node, coupled by the
// birth-death generator of the OU process. A quasi-static Gaussian bath
// reproduces the exp(-dw^2/(2 gamma2^2)) line of the analytic rate model;
// white (Lorentzian) dephasing would not.
//
// The rotating frame co-rotates at the signed drive frequency chosen by
// rotating_frame_frequency() and drops the counter-rotating drive term;
// the sigma_z modulation is kept exactly in both frames.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nvmix/constants.hpp"
#include "nvmix/errors.hpp"
#include "nvmix/mixing.hpp"
#include "nvmix/ode.hpp"
#include "nvmix/spin_model.hpp"

namespace nvmix {

struct PopulationTrace {
  std::vector<double> times;        // seconds (or scaled units)
  std::vector<double> populations;  // population of the initialized state
  MixingConfig meta;
  Frame frame = Frame::Lab;
};

namespace detail {

struct BathGrid {
  std::vector<double> offset;   // detuning node positions
  std::vector<double> weight;   // stationary Gaussian weights, sum = 1
  std::vector<double> hop_up;   // node j -> j+1 rate
  std::vector<double> hop_dn;   // node j -> j-1 rate
};

inline BathGrid make_bath(const NoiseModel& noise) {
  BathGrid g;
  if (noise.gamma2 <= 0.0) {
    g.offset = {0.0};
    g.weight = {1.0};
    g.hop_up = {0.0};
    g.hop_dn = {0.0};
    return g;
  }
  const int n = noise.bath_nodes;
  const double sigma = noise.gamma2;
  const double span = noise.bath_span * sigma;
  g.offset.resize(n);
  g.weight.resize(n);
  g.hop_up.assign(n, 0.0);
  g.hop_dn.assign(n, 0.0);
  const double step = 2.0 * span / (n - 1);
  double wsum = 0.0;
  for (int j = 0; j < n; ++j) {
    g.offset[j] = -span + j * step;
    g.weight[j] = std::exp(-g.offset[j] * g.offset[j] / (2.0 * sigma * sigma));
    wsum += g.weight[j];
  }
  for (auto& w : g.weight) w /= wsum;
  // Detailed-balance discretization of the OU generator: theta = 1/tau_c,
  // base rate theta sigma^2 / step^2 keeps the diffusion coefficient.
  const double theta = sigma / noise.bath_correlation_factor;
  const double base = theta * sigma * sigma / (step * step);
  for (int j = 0; j < n; ++j) {
    if (j + 1 < n) g.hop_up[j] = base * std::sqrt(g.weight[j + 1] / g.weight[j]);
    if (j > 0) g.hop_dn[j] = base * std::sqrt(g.weight[j - 1] / g.weight[j]);
  }
  return g;
}

// State layout: [x_0..x_{K-1}, y..., z..., tau...]. tau_j (node trace) is
// analytically conserved; integrating it provides a live conservation check.
struct MixerRhs {
  const BathGrid* bath;
  double omega_z0;     // static z field: omega_s (lab) or omega_s - omega_f
  double omega_phi;
  double delta_s;
  double phase;
  double drive_coeff;  // transverse field amplitude, see below
  double omega_drive;  // carrier of transverse field; 0 in rotating frame
  double gamma1;

  void operator()(double t, const double* s, double* ds) const {
    const std::size_t k = bath->offset.size();
    const double* x = s;
    const double* y = s + k;
    const double* z = s + 2 * k;
    const double* tau = s + 3 * k;
    double* dx = ds;
    double* dy = ds + k;
    double* dz = ds + 2 * k;
    double* dtau = ds + 3 * k;

    const double bx = (omega_drive == 0.0)
                          ? drive_coeff
                          : drive_coeff * std::cos(omega_drive * t);
    const double bz0 = omega_z0 + delta_s * std::cos(omega_phi * t + phase);
    const double g1 = gamma1;
    for (std::size_t j = 0; j < k; ++j) {
      const double bz = bz0 + bath->offset[j];
      // dr/dt = b x r with b = (bx, 0, bz), plus sigma+- damping.
      dx[j] = -bz * y[j] - g1 * x[j];
      dy[j] = bz * x[j] - bx * z[j] - g1 * y[j];
      dz[j] = bx * y[j] - 2.0 * g1 * z[j];
      dtau[j] = 0.0;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double out = bath->hop_up[j] + bath->hop_dn[j];
      if (out == 0.0) continue;
      dx[j] -= out * x[j];
      dy[j] -= out * y[j];
      dz[j] -= out * z[j];
      dtau[j] -= out * tau[j];
      if (j + 1 < k) {
        const double r = bath->hop_up[j];
        dx[j + 1] += r * x[j];
        dy[j + 1] += r * y[j];
        dz[j + 1] += r * z[j];
        dtau[j + 1] += r * tau[j];
      }
      if (j > 0) {
        const double r = bath->hop_dn[j];
        dx[j - 1] += r * x[j];
        dy[j - 1] += r * y[j];
        dz[j - 1] += r * z[j];
        dtau[j - 1] += r * tau[j];
      }
    }
  }
};

}  // namespace detail

inline constexpr double kPopulationTolerance = 1e-6;
inline constexpr double kMinStepsPerPeriod = 20.0;

inline PopulationTrace propagate_mixing(const MixingConfig& config,
                                        double duration,
                                        std::size_t n_samples,
                                        Frame frame = Frame::Lab,
                                        OdeOptions ode = {}) {
  config.validate();
  if (!(duration > 0.0)) {
    throw PreconditionError("propagate_mixing: duration must be > 0");
  }
  if (n_samples < 2) {
    throw PreconditionError("propagate_mixing: n_samples must be >= 2");
  }

  const auto bath = detail::make_bath(config.noise);
  const std::size_t k = bath.offset.size();

  detail::MixerRhs rhs;
  rhs.bath = &bath;
  rhs.omega_phi = config.signal.omega_phi;
  rhs.delta_s = config.signal.delta_s;
  rhs.phase = config.signal.phase;
  rhs.gamma1 = config.noise.gamma1;

  const double bath_width = config.noise.gamma2 * config.noise.bath_span;
  double fastest;
  if (frame == Frame::Lab) {
    rhs.omega_z0 = config.omega_spin;
    rhs.drive_coeff = 2.0 * config.drive.rabi_omega1;  // Omega1 cos(w1 t) sx
    rhs.omega_drive = config.drive.omega1;
    fastest = std::max({config.omega_spin + config.signal.delta_s + bath_width,
                        config.drive.omega1, config.signal.omega_phi});
  } else {
    const double omega_f = rotating_frame_frequency(
        config.omega_spin, config.signal.omega_phi, config.drive.omega1);
    rhs.omega_z0 = config.omega_spin - omega_f;
    rhs.drive_coeff = config.drive.rabi_omega1;  // RWA: (Omega1/2) sigma_x
    rhs.omega_drive = 0.0;
    fastest = std::max(std::abs(rhs.omega_z0) + config.signal.delta_s +
                           bath_width,
                       config.signal.omega_phi);
  }
  fastest = std::max(fastest, config.drive.rabi_omega1);

  if (ode.max_step <= 0.0 && fastest > 0.0) {
    ode.max_step = kTwoPi / (kMinStepsPerPeriod * fastest);
  }
  if (ode.max_step > 0.0 &&
      duration / ode.max_step > static_cast<double>(ode.max_steps)) {
    throw StepSizeTooCoarse(
        "propagate_mixing: resolving the fastest carrier over this duration "
        "needs " +
        std::to_string(duration / ode.max_step) + " steps, budget is " +
        std::to_string(ode.max_steps));
  }

  std::vector<double> state(4 * k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    state[2 * k + j] = bath.weight[j];  // z_j: start in the bright state
    state[3 * k + j] = bath.weight[j];  // tau_j
  }

  PopulationTrace trace;
  trace.meta = config;
  trace.frame = frame;
  trace.times.resize(n_samples);
  trace.populations.resize(n_samples);

  std::size_t steps_used = 0;
  double t_prev = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t_i =
        duration * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    if (t_i > t_prev) {
      ode_advance(rhs, state, t_prev, t_i, ode, steps_used);
      t_prev = t_i;
    }
    double zsum = 0.0, tsum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      zsum += state[2 * k + j];
      tsum += state[3 * k + j];
    }
    const double pop = 0.5 * (tsum + zsum);
    if (!std::isfinite(pop) || pop < -kPopulationTolerance ||
        pop > 1.0 + kPopulationTolerance ||
        std::abs(tsum - 1.0) > kPopulationTolerance) {
      throw SolverDiverged("propagate_mixing: population left [0,1] (p=" +
                           std::to_string(pop) + ", trace=" +
                           std::to_string(tsum) + " at t=" +
                           std::to_string(t_i) + ")");
    }
    trace.times[i] = t_i;
    trace.populations[i] = pop;
  }
  return trace;
}

inline PopulationTrace propagate_mixing(const NVSpinModel& spin,
                                        const MixerDrive& drive,
                                        const SignalHypothesis& signal,
                                        const NoiseModel& noise,
                                        double duration, std::size_t n_samples,
                                        Frame frame = Frame::Lab) {
  MixingConfig config;
  config.omega_spin = kTwoPi * transition_frequency_hz(spin, Branch::Minus);
  config.drive = drive;
  config.signal = signal;
  config.noise = noise;
  return propagate_mixing(config, duration, n_samples, frame);
}

}  // namespace nvmix
