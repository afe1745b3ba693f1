#pragma once

// Analytic model of the quantum-mixing detection scheme. A bias drive at
// omega1 beats against an oscillation of the level splitting at omega_phi;
// the first phase-modulation sideband lands on the spin transition and
// drives incoherent relaxation.
//
// All *omega* and *rate* quantities here are angular (rad/s, equivalently
// s^-1); there are no cyclic frequencies in this header.

#include <array>
#include <cmath>
#include <limits>

#include "nvmix/constants.hpp"
#include "nvmix/errors.hpp"

namespace nvmix {

enum class Band { Difference, Sum };
enum class Frame { Lab, Rotating };

inline const char* band_name(Band b) {
  return b == Band::Difference ? "difference" : "sum";
}

struct MixerDrive {
  double omega1 = 0.0;                // bias drive frequency
  double rabi_omega1 = kTwoPi * 1e7;  // drive strength Omega_1
  Band band = Band::Difference;

  // The analytic treatment assumes a weak drive; past this ratio the carrier
  // Stark-shifts the transition noticeably.
  bool strong_drive() const { return rabi_omega1 >= 0.1 * omega1; }

  // rabi_omega1 = 0 is allowed (drive off, reference measurements).
  void validate() const {
    if (!(omega1 > 0.0) || !(rabi_omega1 >= 0.0)) {
      throw PreconditionError(
          "MixerDrive: omega1 must be > 0 and rabi_omega1 >= 0");
    }
  }
};

struct SignalHypothesis {
  double omega_phi = 0.0;  // signal (Compton) frequency
  double delta_s = 0.0;    // level-splitting oscillation amplitude
  double phase = 0.0;      // radians

  void validate() const {
    if (!(omega_phi > 0.0)) {
      throw PreconditionError("SignalHypothesis: omega_phi must be > 0");
    }
    if (!(delta_s >= 0.0)) {
      throw PreconditionError("SignalHypothesis: delta_s must be >= 0");
    }
    if (!(delta_s / omega_phi < 1.0)) {
      throw SidebandExpansionInvalid(
          "SignalHypothesis: delta_s/omega_phi >= 1, sideband expansion "
          "invalid");
    }
  }
};

struct NoiseModel {
  double gamma1 = 0.0;  // longitudinal relaxation rate, s^-1
  double gamma2 = 0.0;  // dephasing width (Gaussian detuning std), s^-1

  // Detuning-bath discretization used by the propagator. The bath is an
  // Ornstein-Uhlenbeck process with stationary std gamma2 and correlation
  // time bath_correlation_factor/gamma2, sampled on bath_nodes points over
  // +-bath_span*gamma2.
  double bath_correlation_factor = 10.0;
  int bath_nodes = 45;
  double bath_span = 4.5;

  // gamma2 = 0 switches the bath off entirely (pure-T1 configuration);
  // otherwise the dephasing width must dominate at least half of gamma1.
  void validate() const {
    if (!(gamma1 >= 0.0)) {
      throw PreconditionError("NoiseModel: gamma1 must be >= 0");
    }
    if (gamma2 != 0.0 && !(gamma2 >= 0.5 * gamma1)) {
      throw PreconditionError("NoiseModel: gamma2 must be >= gamma1/2");
    }
    if (gamma2 > 0.0 &&
        !(bath_correlation_factor > 0.0 && bath_nodes >= 3 && bath_span > 0.0)) {
      throw PreconditionError("NoiseModel: invalid bath discretization");
    }
  }
};

// One fully specified detection point.
struct MixingConfig {
  double omega_spin = 0.0;  // spin transition frequency, angular
  MixerDrive drive;
  SignalHypothesis signal;
  NoiseModel noise;

  void validate() const {
    if (!(omega_spin > 0.0)) {
      throw PreconditionError("MixingConfig: omega_spin must be > 0");
    }
    drive.validate();
    signal.validate();
    noise.validate();
  }
};

// Drive frequency that puts the first mixing sideband on the spin
// transition. degeneracy_window guards the difference band against the
// directly-resonant case where no mixing is needed.
inline double mixing_schedule(double omega_phi, double omega_spin, Band band,
                              double degeneracy_window = kTwoPi * 1e7) {
  if (!(omega_phi > 0.0) || !(omega_spin > 0.0)) {
    throw PreconditionError("mixing_schedule: frequencies must be > 0");
  }
  if (band == Band::Sum) {
    return omega_phi + omega_spin;
  }
  const double diff = std::abs(omega_phi - omega_spin);
  if (diff < degeneracy_window) {
    throw DegenerateMixing(
        "mixing_schedule: |omega_phi - omega_spin| below the drive strength; "
        "signal is directly resonant and mixing degenerates");
  }
  return diff;
}

// First-sideband amplitude of a phase-modulated transition,
// Omega_eff = Omega_1 J1(delta_s/omega_phi).
inline double effective_rabi(const SignalHypothesis& signal,
                             const MixerDrive& drive) {
  signal.validate();
  drive.validate();
  const double m = signal.delta_s / signal.omega_phi;
  if (m == 0.0) return 0.0;
  return drive.rabi_omega1 * std::cyl_bessel_j(1.0, m);
}

struct InducedRate {
  double gamma_phi = 0.0;
  // Set when omega_eff >= gamma2 and the rate-equation treatment is
  // questionable (coherent sideband driving); the value is still returned.
  bool coherent_regime = false;
};

// Golden-rule relaxation rate of a weak sideband drive against a Gaussian
// line of width gamma2:
//   gamma_phi = sqrt(pi/2) omega_eff^2 / (2 gamma2) exp(-dw^2 / (2 gamma2^2)).
// The returned rate is a per-direction transition rate; the population
// exponential decays at twice the total rate (see propagation.hpp).
inline InducedRate induced_relaxation_rate(double omega_eff, double detuning,
                                           const NoiseModel& noise) {
  noise.validate();
  if (!(noise.gamma2 > 0.0)) {
    throw PreconditionError("induced_relaxation_rate: gamma2 must be > 0");
  }
  InducedRate out;
  out.coherent_regime = std::abs(omega_eff) >= noise.gamma2;
  const double g2 = noise.gamma2;
  const double gauss = std::exp(-detuning * detuning / (2.0 * g2 * g2));
  out.gamma_phi = std::sqrt(std::numbers::pi / 2.0) * omega_eff * omega_eff /
                  (2.0 * g2) * gauss;
  return out;
}

// Signed mismatch between the closest first-order mixing sideband and the
// spin transition. The drive couples both circular components, so both
// signs of omega1 are admissible.
inline double sideband_detuning(double omega_spin, double omega_phi,
                                double omega1) {
  double best = std::numeric_limits<double>::infinity();
  for (double sgn : {1.0, -1.0}) {
    for (double n : {-1.0, 1.0}) {
      const double mis = omega_spin - sgn * omega1 + n * omega_phi;
      if (std::abs(mis) < std::abs(best)) best = mis;
    }
  }
  return best;
}

// Signed rotating-frame frequency (+-omega1) that brings a first-order
// sideband (n in {-1,0,1}) closest to resonance. Used by the rotating-frame
// propagator so the retained co-rotating drive term is the resonant one.
inline double rotating_frame_frequency(double omega_spin, double omega_phi,
                                       double omega1) {
  double best_mis = std::numeric_limits<double>::infinity();
  double best = omega1;
  for (double sgn : {1.0, -1.0}) {
    for (double n : {-1.0, 0.0, 1.0}) {
      const double mis = std::abs(omega_spin - sgn * omega1 + n * omega_phi);
      if (mis < best_mis) {
        best_mis = mis;
        best = sgn * omega1;
      }
    }
  }
  return best;
}

}  // namespace nvmix
