#include <doctest.h>

#include <cmath>
#include <random>

#include "tfilt/kernels.hpp"
#include "tfilt/space.hpp"

using namespace tfilt;

TEST_CASE("linear_combine scalar basics") {
  const double v = 3.7;
  CHECK(linear_combine<double>({1.0}, {&v}) == v);
  CHECK(linear_combine<double>({1.0, -1.0}, {&v, &v}) == 0.0);
  const double a = 4.0, b = 2.0, c = 0.0;
  CHECK(linear_combine<double>({1.5, -2.0, 0.5}, {&a, &b, &c}) ==
        doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("linear_combine vector basics and errors") {
  Vec a{1.0, 2.0}, b{3.0, -1.0};
  Vec r = linear_combine<Vec>({2.0, 1.0}, {&a, &b});
  CHECK(r[0] == 5.0);
  CHECK(r[1] == 3.0);
  Vec bad{1.0, 2.0, 3.0};
  CHECK_THROWS_AS((void)linear_combine<Vec>({1.0, 1.0}, {&a, &bad}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)linear_combine<Vec>({}, {}), std::invalid_argument);
}

TEST_CASE("norms") {
  CHECK(norm(0.0) == 0.0);
  CHECK(norm(3.0) == 3.0);
  CHECK(norm(-3.0) == 3.0);
  Vec z(5);
  CHECK(norm(z) == 0.0);
  Vec v{3.0, 4.0};
  CHECK(norm(v) == doctest::Approx(5.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(norm_l2(v) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("inner products") {
  Vec v{1.0, 2.0, 3.0};
  Vec z(3);
  CHECK(inner(v, z) == 0.0);
  CHECK(inner(2.0, 3.0) == 6.0);
  CHECK(inner(v, v) == doctest::Approx(norm_l2(v) * norm_l2(v)).epsilon(1e-15));
  Vec bad(4);
  CHECK_THROWS_AS((void)inner(v, bad), std::invalid_argument);
}

TEST_CASE("combine is linear in the coefficients") {
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec x(17), y(17);
    for (std::size_t i = 0; i < 17; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
    }
    const double a1 = u(rng), a2 = u(rng), b1 = u(rng), b2 = u(rng);
    Vec lhs_a = linear_combine<Vec>({a1, a2}, {&x, &y});
    Vec lhs_b = linear_combine<Vec>({b1, b2}, {&x, &y});
    Vec sum = linear_combine<Vec>({1.0, 1.0}, {&lhs_a, &lhs_b});
    Vec rhs = linear_combine<Vec>({a1 + b1, a2 + b2}, {&x, &y});
    for (std::size_t i = 0; i < 17; ++i)
      CHECK(sum[i] == doctest::Approx(rhs[i]).epsilon(1e-12));
  }
}

TEST_CASE("Cauchy-Schwarz on random vectors") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Vec x(32), y(32);
    for (std::size_t i = 0; i < 32; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
    }
    CHECK(std::abs(inner(x, y)) <=
          norm_l2(x) * norm_l2(y) * (1.0 + 1e-12));
  }
}

TEST_CASE("serial and OpenMP kernels agree bitwise") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = (1 << 15) + 37;  // force the parallel path, odd tail
  std::vector<double> a(n), b(n), c(n), d1(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
    c[i] = u(rng);
  }
  const double coeffs[3] = {1.5, -2.0, 0.5};
  const double* srcs[3] = {a.data(), b.data(), c.data()};

  kernels::set_backend(kernels::Backend::Serial);
  kernels::combine(d1.data(), n, std::span<const double>(coeffs, 3),
                   std::span<const double* const>(srcs, 3));
  const double dot_s = kernels::dot(a.data(), b.data(), n);
  const double ss_s = kernels::sum_squares(a.data(), n);

  kernels::set_backend(kernels::Backend::OpenMP);
  kernels::combine(d2.data(), n, std::span<const double>(coeffs, 3),
                   std::span<const double* const>(srcs, 3));
  const double dot_p = kernels::dot(a.data(), b.data(), n);
  const double ss_p = kernels::sum_squares(a.data(), n);

  for (std::size_t i = 0; i < n; ++i) CHECK(d1[i] == d2[i]);
  CHECK(dot_s == dot_p);
  CHECK(ss_s == ss_p);
}
