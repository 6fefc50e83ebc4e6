#pragma once

// Linear-space operations every filter, estimator and stepper is written
// against. A state type opts in by specializing SpaceOps<S>. Shipped
// specializations: double (scalar ODEs), Vec (ODE systems); the spectral
// velocity field adds its own in spectral/field.hpp.
//
// Two norms are exposed on purpose:
//   norm(v)    - the controller norm used against TOL. RMS for ODE systems
//                (L2 / sqrt(dimension)) so one tolerance is meaningful across
//                problem sizes; plain |x| for scalars; domain-weighted L2 for
//                spectral fields.
//   norm_l2(v) - the Euclidean / L2(domain) norm, with inner(v,v) = norm_l2^2.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tfilt/kernels.hpp"

namespace tfilt {

/// Dense real state vector for ODE systems.
struct Vec {
  std::vector<double> data;

  Vec() = default;
  explicit Vec(std::size_t n, double fill = 0.0) : data(n, fill) {}
  Vec(std::initializer_list<double> xs) : data(xs) {}

  std::size_t size() const noexcept { return data.size(); }
  double& operator[](std::size_t i) noexcept { return data[i]; }
  double operator[](std::size_t i) const noexcept { return data[i]; }
};

template <class S>
struct SpaceOps;  // specialize per state type

template <>
struct SpaceOps<double> {
  static double combine(std::span<const double> coeffs,
                        std::span<const double* const> states) {
    double acc = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) acc += coeffs[j] * *states[j];
    return acc;
  }
  static double norm(double v) { return std::abs(v); }
  static double norm_l2(double v) { return std::abs(v); }
  static double inner(double a, double b) { return a * b; }
  static double zero_like(double) { return 0.0; }
  static std::size_t dimension(double) { return 1; }
};

template <>
struct SpaceOps<Vec> {
  static Vec combine(std::span<const double> coeffs,
                     std::span<const Vec* const> states) {
    const std::size_t n = states[0]->size();
    for (const Vec* s : states)
      if (s->size() != n) throw std::invalid_argument("Vec dimension mismatch");
    Vec out(n);
    std::vector<const double*> ptrs(states.size());
    for (std::size_t j = 0; j < states.size(); ++j) ptrs[j] = states[j]->data.data();
    kernels::combine(out.data.data(), n, coeffs, ptrs);
    return out;
  }
  static double norm(const Vec& v) {
    if (v.size() == 0) return 0.0;
    return std::sqrt(kernels::sum_squares(v.data.data(), v.size()) /
                     static_cast<double>(v.size()));
  }
  static double norm_l2(const Vec& v) {
    return std::sqrt(kernels::sum_squares(v.data.data(), v.size()));
  }
  static double inner(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("Vec dimension mismatch");
    return kernels::dot(a.data.data(), b.data.data(), a.size());
  }
  static Vec zero_like(const Vec& v) { return Vec(v.size()); }
  static std::size_t dimension(const Vec& v) { return v.size(); }
};

/// Sum of coeffs[i] * states[i]; the one linear map everything else reuses.
template <class S>
S linear_combine(std::span<const double> coeffs,
                 std::span<const S* const> states) {
  if (coeffs.empty() || coeffs.size() != states.size())
    throw std::invalid_argument("linear_combine: empty or mismatched inputs");
  return SpaceOps<S>::combine(coeffs, states);
}

template <class S>
S linear_combine(std::initializer_list<double> coeffs,
                 std::initializer_list<const S*> states) {
  std::vector<double> c(coeffs);
  std::vector<const S*> s(states);
  return linear_combine<S>(std::span<const double>(c),
                           std::span<const S* const>(s));
}

template <class S>
double norm(const S& v) {
  return SpaceOps<S>::norm(v);
}

template <class S>
double norm_l2(const S& v) {
  return SpaceOps<S>::norm_l2(v);
}

template <class S>
double inner(const S& a, const S& b) {
  return SpaceOps<S>::inner(a, b);
}

template <class S>
S zero_like(const S& v) {
  return SpaceOps<S>::zero_like(v);
}

template <class S>
std::size_t dimension(const S& v) {
  return SpaceOps<S>::dimension(v);
}

}  // namespace tfilt
