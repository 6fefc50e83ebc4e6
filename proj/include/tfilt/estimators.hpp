#pragma once

// Embedded local error estimators for the two approximations produced by a
// backward Euler step plus time filter.
//
//   est1 = y_filtered - y_be          (error estimate for the order-1 value)
//   est2 = prefactor * (y_filtered - c_n y^n + c_nm1 y^{n-1} - c_nm2 y^{n-2})
//                                      (error estimate for the order-2 value)
//
// est2's variable-step weights annihilate any quadratic-in-t data for every
// positive ratio pair; at unit ratios the prefactor is exactly 2/11 and the
// stencil reduces to the third backward difference.

#include <optional>
#include <stdexcept>

#include "tfilt/space.hpp"

namespace tfilt {

/// Step ratios feeding the filters/estimators. r_cur is the current step over
/// the previous one, r_prev is the previous step over the one before it.
struct StepRatios {
  double r_cur = 1.0;
  double r_prev = 1.0;
};

struct Est2Coefficients {
  double prefactor;  // multiplies the whole stencil
  double c_n;        // coefficient of y^n   (entering with a minus sign)
  double c_nm1;      // coefficient of y^{n-1} (plus sign)
  double c_nm2;      // coefficient of y^{n-2} (minus sign)
};

/// Variable-step estimator weights. r_cur plays the role of the ratio of the
/// step being taken, r_prev the one before.
inline Est2Coefficients est2_coefficients(double r_cur, double r_prev) {
  if (!(r_cur > 0.0) || !(r_prev > 0.0))
    throw std::invalid_argument("est2_coefficients: ratios must be positive");
  const double w = r_cur;   // ratio in the step being estimated
  const double v = r_prev;  // ratio one step back
  Est2Coefficients c;
  c.prefactor = v * w * (1.0 + w) /
                (1.0 + 2.0 * w + v * (1.0 + 4.0 * w + 3.0 * w * w));
  c.c_n = (1.0 + w) * (1.0 + v * (1.0 + w)) / (1.0 + v);
  c.c_nm1 = w * (1.0 + v * (1.0 + w));
  c.c_nm2 = v * v * w * (1.0 + w) / (1.0 + v);
  return c;
}

/// Difference of the two embedded approximations.
template <class S>
S est1(const S& y_be, const S& y_filtered) {
  return linear_combine<S>({1.0, -1.0}, {&y_filtered, &y_be});
}

/// Error estimate vector for the order-2 (filtered) value. Requires three
/// back states; callers signal "unavailable" by not calling it (see driver).
template <class S>
S est2(const S& y2, const S& y_n, const S& y_nm1, const S& y_nm2,
       double r_cur, double r_prev) {
  const Est2Coefficients c = est2_coefficients(r_cur, r_prev);
  const S bracket = linear_combine<S>({1.0, -c.c_n, c.c_nm1, -c.c_nm2},
                                      {&y2, &y_n, &y_nm1, &y_nm2});
  return linear_combine<S>({c.prefactor}, {&bracket});
}

/// Norms of the embedded estimates for one attempted step. est2 is absent
/// until three accepted back states exist.
struct ErrorEstimates {
  double est1 = 0.0;
  std::optional<double> est2;
};

}  // namespace tfilt
