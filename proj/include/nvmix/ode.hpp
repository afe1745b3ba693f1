#pragma once

// Embedded Dormand-Prince 5(4) integrator with step control on the state
// error. Generic over the right-hand side; the propagator drives it between
// sample times.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "nvmix/errors.hpp"

namespace nvmix {

struct OdeOptions {
  double rel_tol = 1e-7;
  double abs_tol = 1e-9;
  double max_step = 0.0;  // hard cap; 0 disables
  // Total step budget for one propagation; exceeded -> StepSizeTooCoarse.
  std::size_t max_steps = 200'000'000;
};

namespace detail {

// Dormand-Prince coefficients.
inline constexpr double kC[7] = {0.0,     1.0 / 5, 3.0 / 10, 4.0 / 5,
                                 8.0 / 9, 1.0,     1.0};
inline constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
// 5th-order solution weights equal kA[6]; error weights are b5 - b4.
inline constexpr double kE[7] = {71.0 / 57600,    0.0,   -71.0 / 16695,
                                 71.0 / 1920,     -17253.0 / 339200,
                                 22.0 / 525,      -1.0 / 40};

}  // namespace detail

// Advances `state` from t0 to t1 in place. RHS signature:
//   rhs(double t, const double* y, double* dydt)
// Returns the number of accepted steps. `steps_used` accumulates across
// calls so a whole propagation shares one budget.
template <class Rhs>
std::size_t ode_advance(Rhs&& rhs, std::vector<double>& state, double t0,
                        double t1, const OdeOptions& opts,
                        std::size_t& steps_used) {
  const std::size_t n = state.size();
  if (t1 <= t0) return 0;

  std::vector<double> k[7];
  for (auto& v : k) v.assign(n, 0.0);
  std::vector<double> ytmp(n), ynew(n), yerr(n);

  double t = t0;
  double h = (opts.max_step > 0.0) ? opts.max_step : (t1 - t0);
  h = std::min(h, t1 - t0);
  std::size_t accepted = 0;

  rhs(t, state.data(), k[0].data());  // FSAL seed
  while (t < t1) {
    if (steps_used >= opts.max_steps) {
      throw StepSizeTooCoarse(
          "ode_advance: step budget exhausted; duration too long for the "
          "required carrier resolution");
    }
    h = std::min(h, t1 - t);
    for (int s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += detail::kA[s][j] * k[j][i];
        ytmp[i] = state[i] + h * acc;
      }
      rhs(t + detail::kC[s] * h, ytmp.data(), k[s].data());
    }
    // k[6] was evaluated at the 5th-order solution point (FSAL): ytmp holds
    // y_{n+1}.
    ynew = ytmp;
    double err_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (int j = 0; j < 7; ++j) e += detail::kE[j] * k[j][i];
      e *= h;
      const double scale =
          opts.abs_tol +
          opts.rel_tol * std::max(std::abs(state[i]), std::abs(ynew[i]));
      const double r = e / scale;
      err_norm += r * r;
    }
    err_norm = std::sqrt(err_norm / static_cast<double>(n));
    ++steps_used;

    if (!std::isfinite(err_norm)) {
      throw SolverDiverged("ode_advance: non-finite state");
    }
    if (err_norm <= 1.0) {
      t += h;
      state.swap(ynew);
      k[0].swap(k[6]);  // FSAL
      ++accepted;
    }
    // On rejection state is unchanged, so k[0] stays valid.
    const double grow =
        0.9 * std::pow(std::max(err_norm, 1e-10), -0.2);
    h *= std::clamp(grow, 0.2, 5.0);
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  }
  return accepted;
}

}  // namespace nvmix
