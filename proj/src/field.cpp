#include "tfilt/spectral/field.hpp"

#include <algorithm>
#include <cmath>

namespace tfilt::spectral {

double divergence_rel(const SpectralField& f) {
  const int n = f.n;
  double div_sq = 0.0;
  double scale_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    const double ky = wavenumber(j, n);
    for (int i = 0; i < n; ++i) {
      const double kx = wavenumber(i, n);
      const std::size_t idx = static_cast<std::size_t>(j) * n + i;
      const std::complex<double> d = kx * f.u[idx] + ky * f.v[idx];
      div_sq += std::norm(d);
      scale_sq += (kx * kx + ky * ky) *
                  (std::norm(f.u[idx]) + std::norm(f.v[idx]));
    }
  }
  if (scale_sq == 0.0) return 0.0;
  return std::sqrt(div_sq / scale_sq);
}

double hermitian_defect(const SpectralField& f) {
  const int n = f.n;
  double worst = 0.0;
  double scale = 0.0;
  for (int j = 0; j < n; ++j) {
    const int jn = (n - j) % n;
    for (int i = 0; i < n; ++i) {
      const int in = (n - i) % n;
      const std::size_t a = static_cast<std::size_t>(j) * n + i;
      const std::size_t b = static_cast<std::size_t>(jn) * n + in;
      worst = std::max(worst, std::abs(f.u[a] - std::conj(f.u[b])));
      worst = std::max(worst, std::abs(f.v[a] - std::conj(f.v[b])));
      scale = std::max({scale, std::abs(f.u[a]), std::abs(f.v[a])});
    }
  }
  if (scale == 0.0) return 0.0;
  return worst / scale;
}

double grad_norm_sq(const SpectralField& f) {
  const int n = f.n;
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double ky = wavenumber(j, n);
    for (int i = 0; i < n; ++i) {
      const double kx = wavenumber(i, n);
      const std::size_t idx = static_cast<std::size_t>(j) * n + i;
      s += (kx * kx + ky * ky) * (std::norm(f.u[idx]) + std::norm(f.v[idx]));
    }
  }
  return two_pi * two_pi * s;
}

}  // namespace tfilt::spectral
