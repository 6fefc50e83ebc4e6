#pragma once

// The order-1 backward Euler substep over an abstract problem interface.
//
// A Problem supplies its right-hand side and an implicit_solve that advances
// one backward Euler step to a residual tolerance. Dense ODE problems get a
// damped Newton iteration with a finite-difference Jacobian fallback; the
// spectral testbed plugs in its own Picard solve. Nonconvergence is reported,
// not thrown: the adaptive driver treats it as a rejection with dt halving.
//
// one_leg_step advances the constant-step two-step form
//   3/2 y^{n+1} - 2 y^n + 1/2 y^{n-1} = dt f(t^{n+1}, 3/2 y^{n+1} - y^n + 1/2 y^{n-1})
// by solving in the y^{n+1} variable directly. It must agree with
// filter_order2(be_step(...)) to solver tolerance; the verify module checks
// exactly that.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tfilt/space.hpp"

namespace tfilt {

struct SolverReport {
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

template <class S>
struct StepResult {
  S y;
  SolverReport report;
};

struct SolverOptions {
  double tol = 1e-12;  // absolute, on the RMS residual
  int max_iterations = 50;
};

template <class S>
struct Problem {
  std::function<S(double t, const S& y)> rhs;
  std::function<StepResult<S>(double t, const S& y_prev, double dt,
                              const S* linearization)>
      implicit_solve;
  std::size_t dimension = 0;
};

/// One backward Euler step: returned y satisfies
/// ||y - y_n - dt * rhs(t_n + dt, y)|| <= solver tol when report.converged.
template <class S>
StepResult<S> be_step(const Problem<S>& p, double t_n, const S& y_n, double dt,
                      const S* linearization = nullptr) {
  if (!(dt > 0.0)) throw std::invalid_argument("be_step: dt must be positive");
  return p.implicit_solve(t_n + dt, y_n, dt, linearization);
}

/// Extrapolated linearization point (1+r) y^n - r y^{n-1}; the shift that
/// keeps a linearly-implicit step second-order accurate after filtering.
template <class S>
S linearization_point(const S& y_n, const S& y_nm1, double r_cur) {
  if (r_cur < 0.0)
    throw std::invalid_argument("linearization_point: negative ratio");
  return linear_combine<S>({1.0 + r_cur, -r_cur}, {&y_n, &y_nm1});
}

namespace detail {

/// Damped scalar Newton on g(y) = 0 with finite-difference derivative.
inline StepResult<double> newton_root(const std::function<double(double)>& g,
                                      double y0, const SolverOptions& opts) {
  StepResult<double> out{y0, {}};
  double y = y0;
  double gy = g(y);
  for (int it = 0; it < opts.max_iterations; ++it) {
    out.report.iterations = it;
    out.report.final_residual = std::abs(gy);
    if (std::abs(gy) <= opts.tol) {
      out.report.converged = true;
      out.y = y;
      return out;
    }
    const double h = std::sqrt(std::numeric_limits<double>::epsilon()) *
                     std::max(1.0, std::abs(y));
    const double dg = (g(y + h) - gy) / h;
    if (dg == 0.0 || !std::isfinite(dg)) break;
    double step = -gy / dg;
    double lambda = 1.0;
    for (int k = 0; k < 8; ++k) {
      const double y_try = y + lambda * step;
      const double g_try = g(y_try);
      if (std::isfinite(g_try) && std::abs(g_try) < std::abs(gy)) {
        y = y_try;
        gy = g_try;
        break;
      }
      lambda *= 0.5;
      if (k == 7) {  // no decrease found; take the damped step anyway
        y = y + lambda * step;
        gy = g(y);
      }
    }
  }
  out.report.final_residual = std::abs(gy);
  out.report.converged = std::abs(gy) <= opts.tol;
  out.y = y;
  return out;
}

/// In-place partial-pivot Gaussian elimination; A is n x n row-major.
inline bool solve_dense(std::vector<double>& A, std::vector<double>& b,
                        std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
    if (A[piv * n + col] == 0.0) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    const double d = A[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = A[r * n + col] / d;
      if (m == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) A[r * n + c] -= m * A[col * n + c];
      b[r] -= m * b[col];
    }
  }
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= A[ri * n + c] * b[c];
    b[ri] = s / A[ri * n + ri];
  }
  return true;
}

/// Damped Newton on a vector residual with finite-difference Jacobian.
inline StepResult<Vec> newton_root(const std::function<Vec(const Vec&)>& g,
                                   const Vec& y0, const SolverOptions& opts) {
  const std::size_t n = y0.size();
  StepResult<Vec> out{y0, {}};
  Vec y = y0;
  Vec gy = g(y);
  const auto rms = [&](const Vec& v) { return norm(v); };
  for (int it = 0; it < opts.max_iterations; ++it) {
    out.report.iterations = it;
    out.report.final_residual = rms(gy);
    if (out.report.final_residual <= opts.tol) {
      out.report.converged = true;
      out.y = y;
      return out;
    }
    std::vector<double> J(n * n);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = std::sqrt(std::numeric_limits<double>::epsilon()) *
                       std::max(1.0, std::abs(y[j]));
      Vec yp = y;
      yp[j] += h;
      const Vec gp = g(yp);
      for (std::size_t i = 0; i < n; ++i) J[i * n + j] = (gp[i] - gy[i]) / h;
    }
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -gy[i];
    if (!solve_dense(J, rhs, n)) break;
    double lambda = 1.0;
    for (int k = 0; k < 8; ++k) {
      Vec y_try = y;
      for (std::size_t i = 0; i < n; ++i) y_try[i] += lambda * rhs[i];
      Vec g_try = g(y_try);
      if (rms(g_try) < rms(gy) || k == 7) {
        y = y_try;
        gy = std::move(g_try);
        break;
      }
      lambda *= 0.5;
    }
  }
  out.report.final_residual = rms(gy);
  out.report.converged = out.report.final_residual <= opts.tol;
  out.y = y;
  return out;
}

}  // namespace detail

/// Fully implicit scalar ODE problem backed by damped Newton. A supplied
/// linearization point is used as the initial iterate.
inline Problem<double> make_scalar_ode(std::function<double(double, double)> f,
                                       SolverOptions opts = {}) {
  Problem<double> p;
  p.dimension = 1;
  p.rhs = [f](double t, const double& y) { return f(t, y); };
  p.implicit_solve = [f, opts](double t, const double& y_prev, double dt,
                               const double* lin) {
    const double guess = lin ? *lin : y_prev;
    return detail::newton_root(
        [&](double y) { return y - y_prev - dt * f(t, y); }, guess, opts);
  };
  return p;
}

/// Fully implicit dense-system ODE problem (finite-difference Jacobian).
inline Problem<Vec> make_system_ode(std::function<Vec(double, const Vec&)> f,
                                    std::size_t dim, SolverOptions opts = {}) {
  Problem<Vec> p;
  p.dimension = dim;
  p.rhs = f;
  p.implicit_solve = [f, opts](double t, const Vec& y_prev, double dt,
                               const Vec* lin) {
    const Vec& guess = lin ? *lin : y_prev;
    return detail::newton_root(
        [&](const Vec& y) {
          Vec r = f(t, y);
          for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = y[i] - y_prev[i] - dt * r[i];
          return r;
        },
        guess, opts);
  };
  return p;
}

/// Constant-step two-step (one-leg) form solved in the y^{n+1} variable.
inline StepResult<double> one_leg_step(const Problem<double>& p, double t_np1,
                                       double y_n, double y_nm1, double dt,
                                       SolverOptions opts = {}) {
  return detail::newton_root(
      [&](double y) {
        const double arg = 1.5 * y - y_n + 0.5 * y_nm1;
        return 1.5 * y - 2.0 * y_n + 0.5 * y_nm1 - dt * p.rhs(t_np1, arg);
      },
      y_n, opts);
}

inline StepResult<Vec> one_leg_step(const Problem<Vec>& p, double t_np1,
                                    const Vec& y_n, const Vec& y_nm1, double dt,
                                    SolverOptions opts = {}) {
  return detail::newton_root(
      [&](const Vec& y) {
        Vec arg = linear_combine<Vec>({1.5, -1.0, 0.5}, {&y, &y_n, &y_nm1});
        Vec r = p.rhs(t_np1, arg);
        for (std::size_t i = 0; i < r.size(); ++i)
          r[i] = 1.5 * y[i] - 2.0 * y_n[i] + 0.5 * y_nm1[i] - dt * r[i];
        return r;
      },
      y_n, opts);
}

}  // namespace tfilt
