#pragma once

// Thin wrapper over FFTW's in-place complex 2D transforms. Plans are built
// with FFTW_ESTIMATE so results are reproducible run to run; plan creation is
// serialized because the FFTW planner is not thread-safe.

#include <complex>

namespace tfilt::spectral {

class Fft2d {
 public:
  explicit Fft2d(int n);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  int n() const noexcept { return n_; }

  /// Physical samples -> Fourier coefficients (normalized by 1/n^2).
  void to_spectral(std::complex<double>* data) const;
  /// Fourier coefficients -> physical samples.
  void to_physical(std::complex<double>* data) const;

 private:
  int n_ = 0;
  void* fwd_ = nullptr;  // fftw_plan
  void* bwd_ = nullptr;
};

}  // namespace tfilt::spectral
