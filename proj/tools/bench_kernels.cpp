// Benchmark comparing the serial reference kernels against the OpenMP path,
// plus one full spectral step. Both paths produce bitwise identical results;
// this target only reports timings.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "tfilt/kernels.hpp"
#include "tfilt/spectral/nse.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_of(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

void report(const char* name, double serial, double omp) {
  std::printf("%-28s %12.3e s %12.3e s   speedup %.2fx\n", name, serial, omp,
              serial / omp);
}

}  // namespace

int main() {
  using namespace tfilt;
  const std::size_t len = 1 << 22;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(len), b(len), c(len), dst(len);
  for (std::size_t i = 0; i < len; ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
    c[i] = u(rng);
  }
  const double coeffs[3] = {1.5, -2.0, 0.5};
  const double* srcs[3] = {a.data(), b.data(), c.data()};

  std::printf("%-28s %14s %14s\n", "kernel", "serial", "openmp");

  const auto combine_bench = [&]() {
    kernels::combine(dst.data(), len, std::span<const double>(coeffs, 3),
                     std::span<const double* const>(srcs, 3));
  };
  kernels::set_backend(kernels::Backend::Serial);
  const double cs = time_of(20, combine_bench);
  kernels::set_backend(kernels::Backend::OpenMP);
  const double co = time_of(20, combine_bench);
  report("combine (3 terms, 4M)", cs, co);

  volatile double sink = 0.0;
  const auto dot_bench = [&]() { sink = kernels::dot(a.data(), b.data(), len); };
  kernels::set_backend(kernels::Backend::Serial);
  const double ds = time_of(20, dot_bench);
  kernels::set_backend(kernels::Backend::OpenMP);
  const double dmp = time_of(20, dot_bench);
  report("dot (4M)", ds, dmp);
  (void)sink;

  // One implicit spectral step on a 128^2 field.
  spectral::SpectralNse nse({128, 0.01, 1e-12, 50});
  const auto u0 = spectral::random_solenoidal(128, 1.0, 99);
  const auto step_bench = [&]() {
    auto r = nse.be_step(u0, 0.0, 1e-3, spectral::Variant::Implicit, nullptr,
                         nullptr);
    sink = r.report.final_residual;
  };
  kernels::set_backend(kernels::Backend::Serial);
  const double ss = time_of(5, step_bench);
  kernels::set_backend(kernels::Backend::OpenMP);
  const double so = time_of(5, step_bench);
  report("nse be_step (128^2)", ss, so);

  kernels::set_backend(kernels::Backend::OpenMP);
  return 0;
}
