#pragma once

// Physical constants used across the library. SI units unless noted.
// Values are bundled in a struct (rather than bare constexprs) so that unit
// tests and sensitivity studies can perturb them.

#include <cmath>
#include <numbers>

#include "nvmix/errors.hpp"

namespace nvmix {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PhysicalConstants {
  double h_planck = 6.62607015e-34;   // J s (exact, SI definition)
  double hbar = 6.62607015e-34 / kTwoPi;
  double c_light = 299792458.0;       // m / s (exact)
  // Free-electron gyromagnetic ratio as a cyclic frequency, gamma_e / 2pi
  // in Hz / T (CODATA 2018).
  double electron_gyromagnetic_hz_per_t = 2.80249514242e10;
  // Photon energy per unit frequency, h expressed in eV / GHz.
  double ev_per_ghz = 4.135667696923859e-6;

  // h in eV s, derived from ev_per_ghz.
  double h_ev_s() const { return ev_per_ghz * 1e-9; }

  // gamma_e in angular units, rad / (s T).
  double electron_gyromagnetic_angular() const {
    return kTwoPi * electron_gyromagnetic_hz_per_t;
  }

  void validate() const {
    if (!(h_planck > 0.0 && hbar > 0.0 && c_light > 0.0 &&
          electron_gyromagnetic_hz_per_t > 0.0 && ev_per_ghz > 0.0)) {
      throw PreconditionError("PhysicalConstants: all values must be positive");
    }
    if (std::abs(h_planck - kTwoPi * hbar) > 1e-12 * h_planck) {
      throw PreconditionError(
          "PhysicalConstants: h_planck must equal 2*pi*hbar to 1e-12 relative");
    }
  }
};

}  // namespace nvmix
