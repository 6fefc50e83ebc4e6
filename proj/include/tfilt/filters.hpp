#pragma once

// Linear time filters applied on top of a backward Euler step, and the
// three-point stencil operators used by the constant-step analysis.
//
//   filter_order2:  y2 = y_be - w * (y_be - (1+r) y^n + r y^{n-1}),
//                   w = r/(2r+1); at r = 1 the weight is exactly 1/3 and the
//                   bracket is the second backward difference.
//   filter_second:  y = y2 - est2(...), the doubly filtered value whose local
//                   error no longer carries a y''' term.
//   stencil_I/D:    I[w] = 3/2 w^{n+1} -  w^n + 1/2 w^{n-1}
//                   D[w] = 3/2 w^{n+1} - 2w^n + 1/2 w^{n-1}
//
// Every operation is a pure linear combination; applied to divergence-free
// spectral fields they preserve the constraint by linearity.

#include <stdexcept>

#include "tfilt/estimators.hpp"
#include "tfilt/space.hpp"

namespace tfilt {

/// Filter weight r/(2r+1). Monotone in r; 1/3 at r=1, 2/5 at r=2.
inline double filter_weight(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("filter_weight: r must be positive");
  return r / (2.0 * r + 1.0);
}

/// Second-order filtered value from the backward Euler value and two history
/// states. r_cur is the current step size over the previous one. Computed as
/// y_be minus the weighted difference stencil so constant data passes through
/// exactly and smooth data suffers no recombination cancellation.
template <class S>
S filter_order2(const S& y_be, const S& y_n, const S& y_nm1, double r_cur) {
  const double w = filter_weight(r_cur);
  const S bracket = linear_combine<S>({1.0, -(1.0 + r_cur), r_cur},
                                      {&y_be, &y_n, &y_nm1});
  return linear_combine<S>({1.0, -w}, {&y_be, &bracket});
}

/// Doubly filtered value y2 - est2. Reuses the estimator weights verbatim so
/// the identity y = y2 - est2 holds exactly, not merely to rounding of two
/// independently derived formulas.
template <class S>
S filter_second(const S& y2, const S& y_n, const S& y_nm1, const S& y_nm2,
                double r_cur, double r_prev) {
  const S e = est2(y2, y_n, y_nm1, y_nm2, r_cur, r_prev);
  return linear_combine<S>({1.0, -1.0}, {&y2, &e});
}

/// Interpolation stencil; constant-step context only.
template <class S>
S stencil_I(const S& w_np1, const S& w_n, const S& w_nm1) {
  return linear_combine<S>({1.5, -1.0, 0.5}, {&w_np1, &w_n, &w_nm1});
}

/// Difference stencil; D[w]/dt approximates w_t at the newest time.
template <class S>
S stencil_D(const S& w_np1, const S& w_n, const S& w_nm1) {
  return linear_combine<S>({1.5, -2.0, 0.5}, {&w_np1, &w_n, &w_nm1});
}

}  // namespace tfilt
