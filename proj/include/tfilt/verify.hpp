#pragma once

// Executable checks of the algebraic and analytic facts the method rests on:
// the product identity behind the energy balance, the G-stability quadratic
// form, the stencil consistency rates with their explicit bounds, and the
// equivalence of the filtered step with its two-step one-leg form.

#include <functional>
#include <vector>

#include "tfilt/space.hpp"
#include "tfilt/stepper.hpp"

namespace tfilt::verify {

/// G matrix of the filtered constant-step scheme.
inline constexpr double g_matrix[2][2] = {{1.5, -0.75}, {-0.75, 0.5}};

/// Residual of the product identity
///   (3/2 a - 2b + c/2)(3/2 a - b + c/2)
///     = [a^2 + (2a-b)^2 + (a-b)^2]/4 - [b^2 + (2b-c)^2 + (b-c)^2]/4
///       + 3/4 (a - 2b + c)^2.
double check_identity(double a, double b, double c);

/// Residual of [u,v] G [u;v] = ( |u|^2 + |2u-v|^2 + |u-v|^2 ) / 4 in any
/// inner-product space.
template <class S>
double check_g_form(const S& u_n, const S& u_nm1) {
  const double nn = inner(u_n, u_n);
  const double nm = inner(u_n, u_nm1);
  const double mm = inner(u_nm1, u_nm1);
  const double lhs = g_matrix[0][0] * nn + 2.0 * g_matrix[0][1] * nm +
                     g_matrix[1][1] * mm;
  const S two_minus = linear_combine<S>({2.0, -1.0}, {&u_n, &u_nm1});
  const S diff = linear_combine<S>({1.0, -1.0}, {&u_n, &u_nm1});
  const double rhs =
      0.25 * (nn + inner(two_minus, two_minus) + inner(diff, diff));
  return std::abs(lhs - rhs);
}

struct RateReport {
  std::vector<double> dts;
  std::vector<double> errors;
  double slope = 0.0;  // least-squares fit on log-log pairs
};

double fit_slope_loglog(const std::vector<double>& dts,
                        const std::vector<double>& errors);

/// Scalar analytic function with enough derivatives for the bounds.
struct AnalyticFunction {
  std::function<double(double)> u;
  std::function<double(double)> du;
  std::function<double(double)> d2u;
  std::function<double(double)> d3u;
};

struct ConsistencyReport {
  RateReport d_gap;        // |D[u]/dt - u'(t)|
  RateReport i_gap;        // |I[u] - u(t)|
  bool d_bound_ok = false;  // squared gap <= 6/5 dt^3 int (u''')^2 at every dt
  bool i_bound_ok = false;  // squared gap <= 4/3 dt^3 int (u'')^2 at every dt
};

/// Stencil gaps measured at t_eval over a halving dt ladder.
ConsistencyReport consistency_rates(const AnalyticFunction& f, double t_eval,
                                    double dt0, int levels);

struct EquivalenceReport {
  double max_deviation = 0.0;
  int steps = 0;
  bool solvers_converged = false;
};

/// Advances the filtered-BE route and the one-leg route side by side from the
/// same starting pair and reports the largest iterate gap.
EquivalenceReport check_equivalence(const Problem<double>& problem, double y0,
                                    double y1, double t0, double dt, int steps,
                                    SolverOptions opts = {});

struct LteOrderingReport {
  double err_single = 0.0;  // |filtered value - exact| from exact history
  double err_double = 0.0;  // |doubly filtered value - exact|
  double ratio = 0.0;       // err_single / err_double
};

/// Local errors of the singly and doubly filtered values on a problem whose
/// solution third derivative dominates (y' = f(t), so f_y = 0).
LteOrderingReport lte_ordering(const std::function<double(double)>& y_exact,
                               const std::function<double(double)>& y_prime,
                               double t_np1, double dt, SolverOptions opts = {});

}  // namespace tfilt::verify
