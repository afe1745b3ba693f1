#pragma once

// Small dense Levenberg-Marquardt solver plus the two decay models used in
// the pipeline:
//   counts(t) = shots * (A exp(-G t) + C)       (photon-count relaxation)
//   p(t)      = 1/2 + A exp(-2 g t)             (population trace)
// Parameter counts are tiny (2-3), so the normal equations are solved
// directly with Gaussian elimination.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "nvmix/errors.hpp"

namespace nvmix {

struct LevMarOptions {
  int max_iterations = 200;
  double step_tol = 1e-12;    // relative parameter step
  double gradient_tol = 1e-14;
  double lambda0 = 1e-3;
};

struct LevMarResult {
  std::vector<double> params;
  std::vector<double> covariance;  // row-major n x n, (J^T W J)^-1
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Solves A x = b for small symmetric positive-definite A (in-place partial
// pivoting). Returns false when singular.
inline bool solve_dense(std::vector<double> a, std::vector<double> b,
                        std::size_t n, std::vector<double>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return true;
}

inline bool invert_dense(const std::vector<double>& a, std::size_t n,
                         std::vector<double>& inv) {
  inv.assign(n * n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    std::vector<double> x;
    if (!solve_dense(a, e, n, x)) return false;
    for (std::size_t r = 0; r < n; ++r) inv[r * n + col] = x[r];
  }
  return true;
}

}  // namespace detail

// model(t, params, value, grad[n_params]); weights are 1/sigma_i^2.
template <class Model>
LevMarResult lev_mar(Model&& model, const std::vector<double>& ts,
                     const std::vector<double>& ys,
                     const std::vector<double>& weights,
                     std::vector<double> params,
                     const LevMarOptions& opts = {}) {
  const std::size_t np = params.size();
  const std::size_t m = ts.size();
  std::vector<double> grad(np), jtj(np * np), jtr(np), step;

  auto chi2_of = [&](const std::vector<double>& p) {
    double c = 0.0;
    std::vector<double> g(np);
    for (std::size_t i = 0; i < m; ++i) {
      double v;
      model(ts[i], p.data(), v, g.data());
      const double r = ys[i] - v;
      c += weights[i] * r * r;
    }
    return c;
  };

  double lambda = opts.lambda0;
  double chi2 = chi2_of(params);
  LevMarResult out;
  out.params = params;
  bool small_gradient = false;

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double v;
      model(ts[i], params.data(), v, grad.data());
      const double r = ys[i] - v;
      const double w = weights[i];
      for (std::size_t a = 0; a < np; ++a) {
        jtr[a] += w * grad[a] * r;
        for (std::size_t b = a; b < np; ++b) jtj[a * np + b] += w * grad[a] * grad[b];
      }
    }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < a; ++b) jtj[a * np + b] = jtj[b * np + a];

    double gmax = 0.0;
    for (std::size_t a = 0; a < np; ++a) gmax = std::max(gmax, std::abs(jtr[a]));
    if (gmax < opts.gradient_tol * std::max(chi2, 1.0)) {
      small_gradient = true;
      break;
    }

    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      auto damped = jtj;
      for (std::size_t a = 0; a < np; ++a) damped[a * np + a] *= (1.0 + lambda);
      if (!detail::solve_dense(damped, jtr, np, step)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> trial(np);
      double step_rel = 0.0;
      for (std::size_t a = 0; a < np; ++a) {
        trial[a] = params[a] + step[a];
        step_rel = std::max(step_rel, std::abs(step[a]) /
                                          std::max(std::abs(params[a]), 1e-30));
      }
      const double trial_chi2 = chi2_of(trial);
      if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
        params = trial;
        const double drop = chi2 - trial_chi2;
        chi2 = trial_chi2;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (step_rel < opts.step_tol || drop < 1e-14 * (chi2 + 1e-30)) {
          small_gradient = true;
        }
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
    if (!improved || small_gradient) break;
  }

  out.params = params;
  out.chi2 = chi2;
  out.iterations = it;
  out.converged = small_gradient || it < opts.max_iterations;

  // Covariance from the Gauss-Newton normal matrix at the optimum. Weights
  // are absolute (1/variance), so no chi2 rescaling is applied.
  std::fill(jtj.begin(), jtj.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double v;
    model(ts[i], params.data(), v, grad.data());
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < np; ++b)
        jtj[a * np + b] += weights[i] * grad[a] * grad[b];
  }
  if (!detail::invert_dense(jtj, np, out.covariance)) {
    out.covariance.assign(np * np, 0.0);
    out.converged = false;
  }
  return out;
}

struct ExponentialFit {
  double amplitude = 0.0;
  double rate = 0.0;       // decay constant of the exponential itself
  double offset = 0.0;
  double rate_sigma = 0.0;
  double chi2 = 0.0;
  double chi2_per_dof = 0.0;
  bool converged = false;
};

// Weighted fit of y = A exp(-G t) + C. Initial guesses from the data:
// offset from the tail, amplitude from the head, rate from a log-linear
// regression of the positive part.
inline ExponentialFit fit_exponential(const std::vector<double>& ts,
                                      const std::vector<double>& ys,
                                      const std::vector<double>& weights,
                                      const LevMarOptions& opts = {}) {
  const std::size_t m = ts.size();
  if (m < 4 || ys.size() != m || weights.size() != m) {
    throw PreconditionError("fit_exponential: need >= 4 aligned samples");
  }
  const std::size_t tail = std::max<std::size_t>(2, m / 5);
  double c0 = 0.0;
  for (std::size_t i = m - tail; i < m; ++i) c0 += ys[i];
  c0 /= static_cast<double>(tail);
  double a0 = ys.front() - c0;
  if (a0 == 0.0) a0 = (ys.front() != 0.0 ? 0.1 * std::abs(ys.front()) : 1e-3);

  // log-linear slope over points clearly above the offset
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t nlog = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = (ys[i] - c0) / a0;
    if (d > 0.05) {
      const double ly = std::log(d);
      sx += ts[i];
      sy += ly;
      sxx += ts[i] * ts[i];
      sxy += ts[i] * ly;
      ++nlog;
    }
  }
  double g0 = 0.0;
  if (nlog >= 2) {
    const double det = nlog * sxx - sx * sx;
    if (std::abs(det) > 1e-300) g0 = -(nlog * sxy - sx * sy) / det;
  }
  if (!(g0 > 0.0) || !std::isfinite(g0)) {
    g0 = 1.0 / std::max(ts.back(), 1e-30);
  }

  auto model = [](double t, const double* p, double& v, double* grad) {
    const double e = std::exp(-p[1] * t);
    v = p[0] * e + p[2];
    grad[0] = e;
    grad[1] = -p[0] * t * e;
    grad[2] = 1.0;
  };
  auto res = lev_mar(model, ts, ys, weights, {a0, g0, c0}, opts);
  if (!res.converged) {
    throw FitDidNotConverge("fit_exponential: no convergence after " +
                            std::to_string(res.iterations) + " iterations");
  }
  ExponentialFit out;
  out.amplitude = res.params[0];
  out.rate = res.params[1];
  out.offset = res.params[2];
  out.rate_sigma = std::sqrt(std::max(res.covariance[1 * 3 + 1], 0.0));
  out.chi2 = res.chi2;
  const double dof = static_cast<double>(m) - 3.0;
  out.chi2_per_dof = dof > 0 ? res.chi2 / dof : 0.0;
  out.converged = res.converged;
  return out;
}

// Rate of a population trace, fitting p = 1/2 + A exp(-2 g t). Returns the
// per-direction transition rate g; the factor 2 accounts for bidirectional
// population exchange toward the maximally mixed state.
inline double fit_trace_rate(const std::vector<double>& ts,
                             const std::vector<double>& pops) {
  const std::size_t m = ts.size();
  if (m < 4 || pops.size() != m) {
    throw PreconditionError("fit_trace_rate: need >= 4 aligned samples");
  }
  double a0 = pops.front() - 0.5;
  if (std::abs(a0) < 1e-12) a0 = 0.5;
  // crude rate guess from where the excess halves
  double g0 = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs(pops[i] - 0.5) < 0.5 * std::abs(a0)) {
      g0 = std::log(2.0) / (2.0 * ts[i]);
      break;
    }
  }
  if (!(g0 > 0.0)) g0 = 0.1 / std::max(ts.back(), 1e-30);

  auto model = [](double t, const double* p, double& v, double* grad) {
    const double e = std::exp(-2.0 * p[1] * t);
    v = 0.5 + p[0] * e;
    grad[0] = e;
    grad[1] = -2.0 * t * p[0] * e;
  };
  std::vector<double> w(m, 1.0);
  auto res = lev_mar(model, ts, pops, w, {a0, g0});
  if (!res.converged) {
    throw FitDidNotConverge("fit_trace_rate: no convergence");
  }
  return res.params[1];
}

}  // namespace nvmix
