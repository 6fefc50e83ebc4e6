#include "tfilt/verify.hpp"

#include <cmath>
#include <stdexcept>

#include "tfilt/filters.hpp"
#include "tfilt/quadrature.hpp"

namespace tfilt::verify {

double check_identity(double a, double b, double c) {
  const double lhs = (1.5 * a - 2.0 * b + 0.5 * c) * (1.5 * a - b + 0.5 * c);
  const double e_new =
      0.25 * (a * a + (2.0 * a - b) * (2.0 * a - b) + (a - b) * (a - b));
  const double e_old =
      0.25 * (b * b + (2.0 * b - c) * (2.0 * b - c) + (b - c) * (b - c));
  const double z = 0.75 * (a - 2.0 * b + c) * (a - 2.0 * b + c);
  return std::abs(lhs - (e_new - e_old + z));
}

double fit_slope_loglog(const std::vector<double>& dts,
                        const std::vector<double>& errors) {
  if (dts.size() != errors.size() || dts.size() < 2)
    throw std::invalid_argument("fit_slope_loglog: need >= 2 pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(dts[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConsistencyReport consistency_rates(const AnalyticFunction& f, double t_eval,
                                    double dt0, int levels) {
  ConsistencyReport rep;
  rep.d_bound_ok = true;
  rep.i_bound_ok = true;
  double dt = dt0;
  for (int lv = 0; lv < levels; ++lv, dt *= 0.5) {
    const double w_np1 = f.u(t_eval);
    const double w_n = f.u(t_eval - dt);
    const double w_nm1 = f.u(t_eval - 2.0 * dt);
    const double d_gap =
        std::abs(stencil_D(w_np1, w_n, w_nm1) / dt - f.du(t_eval));
    const double i_gap = std::abs(stencil_I(w_np1, w_n, w_nm1) - w_np1);

    const double int_d3 = integrate_gl(
        [&](double s) { return f.d3u(s) * f.d3u(s); }, t_eval - 2.0 * dt, t_eval);
    const double int_d2 = integrate_gl(
        [&](double s) { return f.d2u(s) * f.d2u(s); }, t_eval - 2.0 * dt, t_eval);
    const double d_bound = 1.2 * dt * dt * dt * int_d3;
    const double i_bound = (4.0 / 3.0) * dt * dt * dt * int_d2;
    if (d_gap * d_gap > d_bound) rep.d_bound_ok = false;
    if (i_gap * i_gap > i_bound) rep.i_bound_ok = false;

    rep.d_gap.dts.push_back(dt);
    rep.d_gap.errors.push_back(d_gap);
    rep.i_gap.dts.push_back(dt);
    rep.i_gap.errors.push_back(i_gap);
  }
  rep.d_gap.slope = fit_slope_loglog(rep.d_gap.dts, rep.d_gap.errors);
  rep.i_gap.slope = fit_slope_loglog(rep.i_gap.dts, rep.i_gap.errors);
  return rep;
}

EquivalenceReport check_equivalence(const Problem<double>& problem, double y0,
                                    double y1, double t0, double dt, int steps,
                                    SolverOptions opts) {
  EquivalenceReport rep;
  rep.steps = steps;
  rep.solvers_converged = true;
  double f_nm1 = y0, f_n = y1;  // filtered-BE route
  double o_nm1 = y0, o_n = y1;  // one-leg route
  double t = t0 + dt;
  for (int s = 0; s < steps; ++s) {
    StepResult<double> be = be_step(problem, t, f_n, dt);
    const double f_new = filter_order2(be.y, f_n, f_nm1, 1.0);
    StepResult<double> ol = one_leg_step(problem, t + dt, o_n, o_nm1, dt, opts);
    if (!be.report.converged || !ol.report.converged)
      rep.solvers_converged = false;
    rep.max_deviation = std::max(rep.max_deviation, std::abs(f_new - ol.y));
    f_nm1 = f_n;
    f_n = f_new;
    o_nm1 = o_n;
    o_n = ol.y;
    t += dt;
  }
  return rep;
}

LteOrderingReport lte_ordering(const std::function<double(double)>& y_exact,
                               const std::function<double(double)>& y_prime,
                               double t_np1, double dt, SolverOptions opts) {
  LteOrderingReport rep;
  const double y_n = y_exact(t_np1 - dt);
  const double y_nm1 = y_exact(t_np1 - 2.0 * dt);
  const double y_nm2 = y_exact(t_np1 - 3.0 * dt);
  // y' = f(t) only, so the BE value is explicit and exact to rounding.
  Problem<double> p = make_scalar_ode(
      [&](double t, double) { return y_prime(t); }, opts);
  const StepResult<double> be = be_step(p, t_np1 - dt, y_n, dt);
  const double y2 = filter_order2(be.y, y_n, y_nm1, 1.0);
  const double y3 = filter_second(y2, y_n, y_nm1, y_nm2, 1.0, 1.0);
  rep.err_single = std::abs(y2 - y_exact(t_np1));
  rep.err_double = std::abs(y3 - y_exact(t_np1));
  rep.ratio = rep.err_single / rep.err_double;
  return rep;
}

}  // namespace tfilt::verify
