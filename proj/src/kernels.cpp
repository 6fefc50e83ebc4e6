#include "tfilt/kernels.hpp"

#include <atomic>
#include <vector>

namespace tfilt::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::OpenMP};

inline bool go_parallel(std::size_t n) {
  return g_backend.load(std::memory_order_relaxed) == Backend::OpenMP &&
         n >= parallel_threshold;
}

// Sums one block serially; the block boundaries are fixed by the array
// length, so the summation tree is identical on every backend.
inline double block_sum_sq(const double* x, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i] * x[i];
  return s;
}

inline double block_dot(const double* x, const double* y, std::size_t lo,
                        std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
  return s;
}
}  // namespace

void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

Backend backend() noexcept { return g_backend.load(std::memory_order_relaxed); }

void combine(double* dst, std::size_t n, std::span<const double> coeffs,
             std::span<const double* const> srcs) {
  const std::size_t m = coeffs.size();
  if (go_parallel(n)) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += coeffs[j] * srcs[j][i];
      dst[i] = acc;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += coeffs[j] * srcs[j][i];
      dst[i] = acc;
    }
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  const std::size_t nblocks = (n + reduction_block - 1) / reduction_block;
  if (nblocks <= 1) return block_dot(x, y, 0, n);
  std::vector<double> partial(nblocks);
  if (go_parallel(n)) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * reduction_block;
      const std::size_t hi = lo + reduction_block < n ? lo + reduction_block : n;
      partial[b] = block_dot(x, y, lo, hi);
    }
  } else {
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t lo = b * reduction_block;
      const std::size_t hi = lo + reduction_block < n ? lo + reduction_block : n;
      partial[b] = block_dot(x, y, lo, hi);
    }
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double sum_squares(const double* x, std::size_t n) {
  const std::size_t nblocks = (n + reduction_block - 1) / reduction_block;
  if (nblocks <= 1) return block_sum_sq(x, 0, n);
  std::vector<double> partial(nblocks);
  if (go_parallel(n)) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * reduction_block;
      const std::size_t hi = lo + reduction_block < n ? lo + reduction_block : n;
      partial[b] = block_sum_sq(x, lo, hi);
    }
  } else {
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t lo = b * reduction_block;
      const std::size_t hi = lo + reduction_block < n ? lo + reduction_block : n;
      partial[b] = block_sum_sq(x, lo, hi);
    }
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

void scale(double* dst, const double* src, double a, std::size_t n) {
  if (go_parallel(n)) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      dst[i] = a * src[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a * src[i];
  }
}

}  // namespace tfilt::kernels
