#pragma once

// Scalar-field dark matter conversions: Compton frequency <-> field mass,
// local-density field amplitude, and coupling exclusion limits
// 1/Lambda_gamma, 1/Lambda_e in GeV^-1.

#include <cmath>

#include "nvmix/constants.hpp"
#include "nvmix/errors.hpp"

namespace nvmix {

// hbar*c in GeV*cm, for converting GeV/cm^3 to natural units (GeV^4).
inline constexpr double kHbarCGevCm = 1.973269804e-14;

struct DarkMatterModel {
  double rho_dm_gev_cm3 = 0.4;  // local energy density, halo convention
  double coherence_q = 1e6;     // informational; linewidth ~ omega/Q
  PhysicalConstants constants{};

  void validate() const {
    if (!(rho_dm_gev_cm3 > 0.0)) {
      throw PreconditionError("DarkMatterModel: rho_dm must be > 0");
    }
  }

  double rho_natural_gev4() const {
    return rho_dm_gev_cm3 * kHbarCGevCm * kHbarCGevCm * kHbarCGevCm;
  }
};

struct CouplingLimit {
  double m_phi_ev = 0.0;
  double freq_hz = 0.0;
  double inv_lambda_gamma_gev = 0.0;  // GeV^-1
  double inv_lambda_e_gev = 0.0;      // GeV^-1
  bool projected = false;             // single sensor vs ensemble projection
};

// m_phi c^2 = h f, returned in eV.
inline double mass_from_frequency_ev(double freq_hz,
                                     const PhysicalConstants& c = {}) {
  if (!(freq_hz > 0.0)) {
    throw PreconditionError("mass_from_frequency_ev: frequency must be > 0");
  }
  return c.h_ev_s() * freq_hz;
}

inline double frequency_from_mass_hz(double m_phi_ev,
                                     const PhysicalConstants& c = {}) {
  if (!(m_phi_ev > 0.0)) {
    throw PreconditionError("frequency_from_mass_hz: mass must be > 0");
  }
  return m_phi_ev / c.h_ev_s();
}

// Coherent-oscillation amplitude at local density, phi0 = sqrt(2 rho)/m_phi,
// in GeV.
inline double field_amplitude_gev(const DarkMatterModel& dm, double m_phi_ev) {
  dm.validate();
  if (!(m_phi_ev > 0.0)) {
    throw PreconditionError("field_amplitude_gev: mass must be > 0");
  }
  const double m_gev = m_phi_ev * 1e-9;
  return std::sqrt(2.0 * dm.rho_natural_gev4()) / m_gev;
}

// Linear couplings: da/a = phi/Lambda_gamma and dm_e/m_e = phi/Lambda_e, so
// a variation limit maps to 1/Lambda <= limit / phi0.
inline CouplingLimit coupling_limit(const DarkMatterModel& dm, double freq_hz,
                                    double variation_up_alpha,
                                    double variation_up_me) {
  if (!(variation_up_alpha >= 0.0) || !(variation_up_me >= 0.0)) {
    throw PreconditionError("coupling_limit: variation limits must be >= 0");
  }
  CouplingLimit out;
  out.freq_hz = freq_hz;
  out.m_phi_ev = mass_from_frequency_ev(freq_hz, dm.constants);
  const double phi0 = field_amplitude_gev(dm, out.m_phi_ev);
  out.inv_lambda_gamma_gev = variation_up_alpha / phi0;
  out.inv_lambda_e_gev = variation_up_me / phi0;
  out.projected = false;
  return out;
}

inline constexpr double kDefaultEnsembleFactor = 2.8e4;

// Ensemble sensitivity projection: limits improve by a uniform factor.
inline CouplingLimit ensemble_projection(const CouplingLimit& limit,
                                         double factor = kDefaultEnsembleFactor) {
  if (!(factor >= 1.0)) {
    throw PreconditionError("ensemble_projection: factor must be >= 1");
  }
  CouplingLimit out = limit;
  out.inv_lambda_gamma_gev /= factor;
  out.inv_lambda_e_gev /= factor;
  out.projected = true;
  return out;
}

}  // namespace nvmix
