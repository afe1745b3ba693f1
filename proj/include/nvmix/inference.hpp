#pragma once

// From decay measurements to upper limits.
//
// Rate bookkeeping: fit_relaxation returns the decay constant of the fitted
// count exponential. Populations exchange in both directions, so that
// constant is twice the per-direction transition rate used by the analytic
// mixer model; callers converting fits to transition rates divide by two
// (see sweep.hpp). excess_rate_limit and variation_upper_limit are agnostic:
// they propagate whatever convention they are fed, and the pipeline feeds
// them per-direction rates.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nvmix/errors.hpp"
#include "nvmix/fitting.hpp"
#include "nvmix/mixing.hpp"
#include "nvmix/rng.hpp"
#include "nvmix/spin_model.hpp"

namespace nvmix {

struct DecayRecord {
  std::vector<double> wait_times_s;
  std::vector<long long> counts;  // summed photon counts per wait time
  long long shots = 0;            // repetitions per point
  double reference_counts_bright = 0.0;  // counts/shot calibration
  double reference_counts_dark = 0.0;

  void validate() const {
    if (wait_times_s.size() < 4 || counts.size() != wait_times_s.size()) {
      throw PreconditionError(
          "DecayRecord: need >= 4 aligned (wait, counts) pairs");
    }
    if (shots <= 0) throw PreconditionError("DecayRecord: shots must be > 0");
    for (std::size_t i = 1; i < wait_times_s.size(); ++i) {
      if (!(wait_times_s[i] > wait_times_s[i - 1])) {
        throw PreconditionError("DecayRecord: wait times must be increasing");
      }
    }
    for (auto c : counts) {
      if (c < 0) throw PreconditionError("DecayRecord: negative counts");
    }
  }
};

struct RateEstimate {
  double rate = 0.0;   // decay constant of the fitted exponential, s^-1
  double sigma = 0.0;  // one standard error on rate
  double fit_amplitude = 0.0;  // counts/shot
  double fit_offset = 0.0;     // counts/shot
  double chi2_per_dof = 0.0;
};

// Upper-limit container carrying the chain it was derived through.
struct UpperLimit {
  double gamma_phi_up = 0.0;  // s^-1, per-direction convention
  double frac_variation_up_alpha = 0.0;
  double frac_variation_up_me = 0.0;
  double confidence = 0.95;
  MixingConfig chain_config;
  SensitivityCoefficients chain_coeffs;
};

// Synthetic photon-count relaxation record. Expected counts per point:
//   mu_i = shots * baseline_rate * (1 - contrast * (1 - exp(-G t_i)))
// where G is the decay constant of the observable exponential. Counts are
// Poisson draws; identical (inputs, seed) give identical records.
inline DecayRecord synthesize_measurement(double true_gamma_total,
                                          double contrast,
                                          double baseline_rate,
                                          const std::vector<double>& wait_times,
                                          long long shots,
                                          std::uint64_t seed) {
  if (!(contrast > 0.0 && contrast <= 1.0)) {
    throw PreconditionError("synthesize_measurement: contrast must be in (0,1]");
  }
  if (shots <= 0) {
    throw PreconditionError("synthesize_measurement: shots must be > 0");
  }
  if (!(baseline_rate > 0.0)) {
    throw PreconditionError("synthesize_measurement: baseline_rate must be > 0");
  }
  DecayRecord rec;
  rec.wait_times_s = wait_times;
  rec.shots = shots;
  rec.reference_counts_bright = baseline_rate;
  rec.reference_counts_dark = baseline_rate * (1.0 - contrast);
  rec.counts.resize(wait_times.size());
  auto rng = make_engine(seed);
  for (std::size_t i = 0; i < wait_times.size(); ++i) {
    const double decayed = std::exp(-true_gamma_total * wait_times[i]);
    const double mean = static_cast<double>(shots) * baseline_rate *
                        (1.0 - contrast * (1.0 - decayed));
    rec.counts[i] = sample_poisson(rng, mean);
  }
  rec.validate();
  return rec;
}

// Weighted nonlinear least squares of counts = shots*(A exp(-G t) + C) with
// Poisson weights 1/max(counts,1). Returns G and its standard error from
// the curvature of the objective at the optimum.
inline RateEstimate fit_relaxation(const DecayRecord& record) {
  record.validate();
  bool all_equal = true;
  for (std::size_t i = 1; i < record.counts.size(); ++i) {
    if (record.counts[i] != record.counts[0]) {
      all_equal = false;
      break;
    }
  }
  if (all_equal) {
    throw DegenerateData(
        "fit_relaxation: all counts equal; no decay information");
  }
  const std::size_t m = record.counts.size();
  std::vector<double> ys(m), ws(m);
  for (std::size_t i = 0; i < m; ++i) {
    ys[i] = static_cast<double>(record.counts[i]);
    ws[i] = 1.0 / std::max(ys[i], 1.0);
  }
  auto fit = fit_exponential(record.wait_times_s, ys, ws);
  const double shots = static_cast<double>(record.shots);
  RateEstimate est;
  est.rate = fit.rate;
  est.sigma = fit.rate_sigma;
  est.fit_amplitude = fit.amplitude / shots;
  est.fit_offset = fit.offset / shots;
  est.chi2_per_dof = fit.chi2_per_dof;
  if (!(est.sigma > 0.0) || !std::isfinite(est.chi2_per_dof)) {
    throw DegenerateData("fit_relaxation: degenerate fit (sigma=" +
                         std::to_string(est.sigma) + ")");
  }
  return est;
}

// Confidence -> sigma multiplier. 95% maps to exactly 2 (the experiment's
// stated convention); other levels use the two-sided Gaussian quantile.
inline double sigma_multiplier(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw PreconditionError("sigma_multiplier: confidence must be in (0,1)");
  }
  if (std::abs(confidence - 0.95) < 1e-12) return 2.0;
  // Newton inversion of erf for Phi^-1((1+c)/2) = sqrt(2) erfinv(c).
  const double target = confidence;
  double x = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double f = std::erf(x) - target;
    const double df = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
    const double step = f / df;
    x -= step;
    if (std::abs(step) < 1e-14) break;
  }
  return std::sqrt(2.0) * x;
}

struct ExcessRate {
  double gamma_hat = 0.0;   // signal - reference point estimate
  double sigma = 0.0;       // combined standard error
  double upper = 0.0;       // max(gamma_hat, 0) + z * sigma
  double confidence = 0.95;
};

// One-sided upper limit on the excess rate, clipped at the physical
// boundary before adding z sigma.
inline ExcessRate excess_rate_limit(const RateEstimate& signal_fit,
                                    const RateEstimate& reference_fit,
                                    double confidence = 0.95) {
  if (!std::isfinite(signal_fit.rate) || !std::isfinite(reference_fit.rate)) {
    throw PreconditionError("excess_rate_limit: non-finite rate estimate");
  }
  ExcessRate out;
  out.gamma_hat = signal_fit.rate - reference_fit.rate;
  out.sigma = std::hypot(signal_fit.sigma, reference_fit.sigma);
  out.confidence = confidence;
  out.upper = std::max(out.gamma_hat, 0.0) +
              sigma_multiplier(confidence) * out.sigma;
  return out;
}

inline constexpr double kSidebandInversionLimit = 0.28;

// Inverts the detection chain: rate limit -> effective Rabi -> splitting
// amplitude (small-argument J1) -> fractional level shift -> constant
// variations, attributing the full shift to one constant at a time. The
// off-resonance penalty exp(dw^2/(2 gamma2^2)) multiplies the fractional
// limit directly.
inline UpperLimit variation_upper_limit(double gamma_phi_up,
                                        const MixingConfig& config,
                                        const SensitivityCoefficients& coeffs,
                                        double confidence = 0.95) {
  config.validate();
  if (!(gamma_phi_up >= 0.0)) {
    throw PreconditionError("variation_upper_limit: rate limit must be >= 0");
  }
  const double g2 = config.noise.gamma2;
  if (!(g2 > 0.0)) {
    throw PreconditionError("variation_upper_limit: gamma2 must be > 0");
  }
  const double omega_eff_up =
      std::sqrt(2.0 * g2 * gamma_phi_up / std::sqrt(std::numbers::pi / 2.0));
  const double delta_s_up =
      2.0 * config.signal.omega_phi * omega_eff_up / config.drive.rabi_omega1;
  if (delta_s_up / config.signal.omega_phi >= kSidebandInversionLimit) {
    throw SidebandInversionInvalid(
        "variation_upper_limit: implied delta_s/omega_phi = " +
        std::to_string(delta_s_up / config.signal.omega_phi) +
        " outside the small-argument inversion range");
  }
  const double detuning = sideband_detuning(
      config.omega_spin, config.signal.omega_phi, config.drive.omega1);
  const double penalty = std::exp(detuning * detuning / (2.0 * g2 * g2));
  const double frac_e = delta_s_up / config.omega_spin * penalty;

  UpperLimit out;
  out.gamma_phi_up = gamma_phi_up;
  out.frac_variation_up_alpha = frac_e / coeffs.k_alpha;
  out.frac_variation_up_me = frac_e / coeffs.k_me;
  out.confidence = confidence;
  out.chain_config = config;
  out.chain_coeffs = coeffs;
  return out;
}

}  // namespace nvmix
