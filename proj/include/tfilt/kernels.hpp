#pragma once

// Low-level array kernels shared by every state type (ODE vectors and
// spectral coefficient arrays). Each kernel has a serial reference path and
// an OpenMP path selected at runtime; both produce bitwise identical results
// because reductions always use the same fixed-size block tree regardless of
// thread count.

#include <cstddef>
#include <span>

namespace tfilt::kernels {

enum class Backend { Serial, OpenMP };

/// Select the kernel backend process-wide. Defaults to OpenMP when compiled
/// with OpenMP support. Safe to call once at startup; results do not depend
/// on the choice.
void set_backend(Backend b);
Backend backend() noexcept;

/// Arrays below this length always run serially (parallel overhead dominates).
inline constexpr std::size_t parallel_threshold = 1 << 13;

/// Block length of the deterministic reduction tree.
inline constexpr std::size_t reduction_block = 1 << 12;

/// dst[i] = sum_j coeffs[j] * srcs[j][i]. dst may alias one of the sources.
void combine(double* dst, std::size_t n, std::span<const double> coeffs,
             std::span<const double* const> srcs);

/// Deterministic blocked sum of x[i]*y[i].
double dot(const double* x, const double* y, std::size_t n);

/// Deterministic blocked sum of x[i]^2.
double sum_squares(const double* x, std::size_t n);

void scale(double* dst, const double* src, double a, std::size_t n);

}  // namespace tfilt::kernels
