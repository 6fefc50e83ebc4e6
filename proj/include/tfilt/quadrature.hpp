#pragma once

// Composite 5-point Gauss-Legendre quadrature; used only by the verification
// harness to evaluate the analytic bounds' integrals.

#include <functional>

namespace tfilt {

inline double integrate_gl(const std::function<double(double)>& f, double a,
                           double b, int subdivisions = 64) {
  // 5-point Gauss-Legendre nodes/weights on [-1, 1].
  static constexpr double node[5] = {-0.90617984593866396, -0.53846931010568311,
                                     0.0, 0.53846931010568311,
                                     0.90617984593866396};
  static constexpr double weight[5] = {0.23692688505618911, 0.47862867049936647,
                                       0.56888888888888889, 0.47862867049936647,
                                       0.23692688505618911};
  const double h = (b - a) / subdivisions;
  double total = 0.0;
  for (int s = 0; s < subdivisions; ++s) {
    const double mid = a + (s + 0.5) * h;
    double acc = 0.0;
    for (int q = 0; q < 5; ++q) acc += weight[q] * f(mid + 0.5 * h * node[q]);
    total += 0.5 * h * acc;
  }
  return total;
}

}  // namespace tfilt
