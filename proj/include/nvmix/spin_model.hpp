#pragma once

// Ground-state level structure of the NV spin sensor and its scaling with
// the fine-structure constant and the electron mass.
//
// The m_s = 0 <-> -1 (or +1) transition energies are
//     E_-/hbar = D - gamma_e B0,   E_+/hbar = D + gamma_e B0,
// and the two contributions carry composite power laws
//     D       ~ alpha^4 m_e        (spin-spin interaction, mu_B^2 / a0^3)
//     gamma_e B0 ~ alpha m_e^-2    (both factors proportional to mu_B).
// Logarithmic differentiation of E_-+ then gives the dimensionless
// sensitivity coefficients k_alpha, k_me used throughout the pipeline.
//
// Convention: frequencies are cyclic (Hz) at public boundaries; fields named
// omega_* or *_D hold angular values (rad/s).

#include <cmath>
#include <string>

#include "nvmix/constants.hpp"
#include "nvmix/errors.hpp"

namespace nvmix {

enum class Branch { Minus, Plus };

inline const char* branch_name(Branch b) {
  return b == Branch::Minus ? "minus" : "plus";
}

struct NVSpinModel {
  // Zero-field splitting, angular (rad/s).
  double zero_field_splitting_D = kTwoPi * 2.87e9;
  double magnetic_field_B0 = 0.0;  // tesla
  PhysicalConstants constants{};

  // Zeeman term gamma_e * B0, angular (rad/s).
  double zeeman_angular() const {
    return constants.electron_gyromagnetic_angular() * magnetic_field_B0;
  }

  // True when the Zeeman term exceeds D and the minus branch has crossed.
  bool off_branch() const { return zeeman_angular() > zero_field_splitting_D; }

  void validate() const {
    constants.validate();
    if (!(zero_field_splitting_D > 0.0)) {
      throw PreconditionError("NVSpinModel: zero-field splitting must be > 0");
    }
    if (!(magnetic_field_B0 >= 0.0)) {
      throw PreconditionError("NVSpinModel: magnetic field must be >= 0");
    }
  }
};

// Log-derivatives of the two level-splitting contributions. Defaults encode
// D ~ alpha^4 m_e and Zeeman ~ alpha m_e^-2; overridable for what-if studies.
struct ScalingExponents {
  double d_alpha = 4.0;
  double d_me = 1.0;
  double z_alpha = 1.0;
  double z_me = -2.0;
};

struct SensitivityCoefficients {
  double k_alpha = 0.0;
  double k_me = 0.0;
  Branch branch = Branch::Minus;
};

struct TransitionFrequencies {
  double f_minus_hz = 0.0;
  double f_plus_hz = 0.0;
  // Set when f_minus is negative (level crossing passed); the value is still
  // returned so callers can see by how much.
  bool off_branch = false;
};

// f_+- = D/2pi -+ (gamma_e/2pi) B0, in Hz.
inline TransitionFrequencies transition_frequencies(const NVSpinModel& model) {
  model.validate();
  const double d_hz = model.zero_field_splitting_D / kTwoPi;
  const double zeeman_hz =
      model.constants.electron_gyromagnetic_hz_per_t * model.magnetic_field_B0;
  TransitionFrequencies out;
  out.f_minus_hz = d_hz - zeeman_hz;
  out.f_plus_hz = d_hz + zeeman_hz;
  out.off_branch = out.f_minus_hz < 0.0;
  return out;
}

inline double transition_frequency_hz(const NVSpinModel& model, Branch branch) {
  const auto f = transition_frequencies(model);
  return branch == Branch::Minus ? f.f_minus_hz : f.f_plus_hz;
}

// Default guard against the level crossing where the coefficients diverge.
inline constexpr double kDefaultDegeneracyFloor = kTwoPi * 1e6;  // rad/s

// k_alpha = (d_alpha D -+ z_alpha Z) / (D -+ Z), likewise k_me, with
// Z = gamma_e B0 and the upper sign for the minus branch.
inline SensitivityCoefficients sensitivity_coefficients(
    const NVSpinModel& model, const ScalingExponents& exps = {},
    Branch branch = Branch::Minus,
    double degeneracy_floor = kDefaultDegeneracyFloor) {
  model.validate();
  const double d = model.zero_field_splitting_D;
  const double z = model.zeeman_angular();
  const double sign = (branch == Branch::Minus) ? -1.0 : 1.0;
  const double denom = d + sign * z;
  if (std::abs(denom) < degeneracy_floor) {
    throw DegenerateBranch("sensitivity_coefficients: |D " +
                           std::string(sign < 0 ? "-" : "+") +
                           " gamma_e B0| below degeneracy floor; coefficients "
                           "diverge near the level crossing");
  }
  SensitivityCoefficients out;
  out.k_alpha = (exps.d_alpha * d + sign * exps.z_alpha * z) / denom;
  out.k_me = (exps.d_me * d + sign * exps.z_me * z) / denom;
  out.branch = branch;
  if (!std::isfinite(out.k_alpha) || !std::isfinite(out.k_me)) {
    throw DegenerateBranch("sensitivity_coefficients: non-finite result");
  }
  return out;
}

// Angular-frequency amplitude of the level-splitting oscillation produced by
// fractional constant variations, delta_s = (k_a da/a + k_m dm/m) omega_s.
// Valid in the linearized regime |frac| < 1e-2.
inline double level_shift_amplitude(const SensitivityCoefficients& coeffs,
                                    double frac_alpha, double frac_me,
                                    double omega_spin) {
  if (!(std::abs(frac_alpha) < 1e-2 && std::abs(frac_me) < 1e-2)) {
    throw PreconditionError(
        "level_shift_amplitude: fractional variations must be < 1e-2");
  }
  return (coeffs.k_alpha * frac_alpha + coeffs.k_me * frac_me) * omega_spin;
}

inline double level_shift_amplitude(const NVSpinModel& model,
                                    const SensitivityCoefficients& coeffs,
                                    double frac_alpha, double frac_me) {
  const double omega_spin =
      kTwoPi * transition_frequency_hz(model, coeffs.branch);
  return level_shift_amplitude(coeffs, frac_alpha, frac_me, omega_spin);
}

}  // namespace nvmix
