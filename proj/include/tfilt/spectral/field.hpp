#pragma once

// Divergence-free 2D periodic velocity field stored as Fourier coefficients
// on the [0, 2pi]^2 box, plus the scalar pressure field recovered from the
// momentum balance. Index layout is row-major [ky_index * n + kx_index]; the
// wavenumber of index i is i for i <= n/2 and i - n above. Norms carry the
// (2pi)^2 domain weight so norm(u)^2 = integral |u|^2 dx by Parseval.

#include <complex>
#include <cstdint>
#include <vector>

#include "tfilt/space.hpp"

namespace tfilt::spectral {

inline int wavenumber(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

/// Largest retained wavenumber under the 2/3 rule. 3*kmax <= n-1 for every
/// power-of-two n, so dealiased quadratic (and energy-paired cubic) products
/// of retained modes are computed without aliasing error.
inline int dealias_kmax(int n) { return n / 3; }

inline constexpr double two_pi = 6.283185307179586476925286766559;

struct SpectralField {
  int n = 0;
  std::vector<std::complex<double>> u, v;  // velocity components, spectral

  SpectralField() = default;
  explicit SpectralField(int n_)
      : n(n_),
        u(static_cast<std::size_t>(n_) * n_),
        v(static_cast<std::size_t>(n_) * n_) {}

  std::size_t modes() const { return u.size(); }
};

struct PressureField {
  int n = 0;
  std::vector<std::complex<double>> p;

  PressureField() = default;
  explicit PressureField(int n_)
      : n(n_), p(static_cast<std::size_t>(n_) * n_) {}
};

/// Relative divergence: ||k . u(k)|| over ||k| |u(k)||.
double divergence_rel(const SpectralField& f);

/// Domain-weighted L2 norm of a scalar spectral field.
inline double pressure_norm_l2(const PressureField& p) {
  return two_pi *
         std::sqrt(kernels::sum_squares(
             reinterpret_cast<const double*>(p.p.data()), 2 * p.p.size()));
}

/// Largest |Im u(x)| after transforming back; Hermitian-symmetry probe.
double hermitian_defect(const SpectralField& f);

/// ||grad u||_{L2}^2 = (2pi)^2 sum |k|^2 (|u_k|^2 + |v_k|^2).
double grad_norm_sq(const SpectralField& f);

/// Physical-space samples of one velocity component at grid node (i, j).
struct PhysicalSample {
  double x, y, ux, uy;
};

}  // namespace tfilt::spectral

namespace tfilt {

template <>
struct SpaceOps<spectral::SpectralField> {
  using S = spectral::SpectralField;

  static S combine(std::span<const double> coeffs,
                   std::span<const S* const> states) {
    const S& first = *states[0];
    for (const S* s : states)
      if (s->n != first.n)
        throw std::invalid_argument("SpectralField dimension mismatch");
    S out(first.n);
    const std::size_t nd = 2 * first.modes();  // doubles per component array
    std::vector<const double*> ptrs(states.size());
    for (std::size_t j = 0; j < states.size(); ++j)
      ptrs[j] = reinterpret_cast<const double*>(states[j]->u.data());
    kernels::combine(reinterpret_cast<double*>(out.u.data()), nd, coeffs, ptrs);
    for (std::size_t j = 0; j < states.size(); ++j)
      ptrs[j] = reinterpret_cast<const double*>(states[j]->v.data());
    kernels::combine(reinterpret_cast<double*>(out.v.data()), nd, coeffs, ptrs);
    return out;
  }

  // Domain-weighted L2 norm; the controller norm and the L2 norm coincide
  // for spectral fields (already resolution independent).
  static double norm(const S& f) { return norm_l2(f); }

  static double norm_l2(const S& f) {
    const std::size_t nd = 2 * f.modes();
    const double s =
        kernels::sum_squares(reinterpret_cast<const double*>(f.u.data()), nd) +
        kernels::sum_squares(reinterpret_cast<const double*>(f.v.data()), nd);
    return spectral::two_pi * std::sqrt(s);
  }

  static double inner(const S& a, const S& b) {
    if (a.n != b.n)
      throw std::invalid_argument("SpectralField dimension mismatch");
    const std::size_t nd = 2 * a.modes();
    const double s =
        kernels::dot(reinterpret_cast<const double*>(a.u.data()),
                     reinterpret_cast<const double*>(b.u.data()), nd) +
        kernels::dot(reinterpret_cast<const double*>(a.v.data()),
                     reinterpret_cast<const double*>(b.v.data()), nd);
    return spectral::two_pi * spectral::two_pi * s;
  }

  static S zero_like(const S& f) { return S(f.n); }
  static std::size_t dimension(const S& f) { return 2 * f.modes(); }
};

}  // namespace tfilt
