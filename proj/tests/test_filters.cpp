#include <doctest.h>

#include <cmath>
#include <random>

#include "tfilt/filters.hpp"

using namespace tfilt;

TEST_CASE("filter weight values") {
  CHECK(filter_weight(1.0) == 1.0 / 3.0);
  CHECK(filter_weight(2.0) == 0.4);
  CHECK_THROWS_AS(filter_weight(0.0), std::invalid_argument);
  CHECK_THROWS_AS(filter_weight(-1.0), std::invalid_argument);
  double prev = 0.0;
  for (double r = 0.05; r < 20.0; r *= 1.3) {
    const double w = filter_weight(r);
    CHECK(w > prev);
    prev = w;
  }
}

TEST_CASE("filter_order2 worked values") {
  CHECK(filter_order2(4.0, 2.0, 1.0, 1.0) ==
        doctest::Approx(11.0 / 3.0).epsilon(1e-15));
  // r = 2: bracket 4 - 3*2 + 2*1 = 0, filtered value unchanged
  CHECK(filter_order2(4.0, 2.0, 1.0, 2.0) == 4.0);
}

TEST_CASE("filter_order2 leaves constant data untouched exactly") {
  for (double r : {0.1, 0.37, 1.0, 2.0, 9.5}) {
    CHECK(filter_order2(5.25, 5.25, 5.25, r) == 5.25);
  }
}

TEST_CASE("filter_order2 leaves linear data invariant for any ratio") {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> logr(std::log(0.1), std::log(10.0));
  for (int trial = 0; trial < 500; ++trial) {
    const double alpha = u(rng), beta = u(rng);
    const double r = std::exp(logr(rng));
    const double h_prev = 0.05 + std::abs(u(rng));
    const double h_cur = r * h_prev;
    const double t_nm1 = u(rng);
    const double t_n = t_nm1 + h_prev;
    const double t_np1 = t_n + h_cur;
    const auto line = [&](double t) { return alpha + beta * t; };
    const double filtered =
        filter_order2(line(t_np1), line(t_n), line(t_nm1), r);
    const double scale = std::abs(line(t_np1)) + std::abs(alpha) + 1.0;
    CHECK(std::abs(filtered - line(t_np1)) <= 1e-13 * scale);
  }
}

TEST_CASE("filter_second worked values") {
  CHECK(filter_second(4.0, 2.0, 1.0, 1.0, 1.0, 1.0) == 4.0);
  CHECK(filter_second(4.0, 2.0, 1.0, 0.0, 1.0, 1.0) ==
        doctest::Approx(42.0 / 11.0).epsilon(1e-15));
}

TEST_CASE("filter_second leaves quadratic data invariant for any ratios") {
  std::mt19937_64 rng(200);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> logr(std::log(0.1), std::log(10.0));
  for (int trial = 0; trial < 500; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const double r_cur = std::exp(logr(rng));
    const double r_prev = std::exp(logr(rng));
    const double h2 = 0.05 + std::abs(u(rng));
    const double h1 = r_prev * h2;
    const double h0 = r_cur * h1;
    const double t_nm2 = u(rng);
    const double t_nm1 = t_nm2 + h2;
    const double t_n = t_nm1 + h1;
    const double t_np1 = t_n + h0;
    const auto q = [&](double t) { return a + b * t + c * t * t; };
    const double out = filter_second(q(t_np1), q(t_n), q(t_nm1), q(t_nm2),
                                     r_cur, r_prev);
    const auto co = est2_coefficients(r_cur, r_prev);
    const double ymax =
        std::max({std::abs(q(t_np1)), std::abs(q(t_n)), std::abs(q(t_nm1)),
                  std::abs(q(t_nm2)), 1.0});
    const double scale =
        co.prefactor * (1.0 + co.c_n + co.c_nm1 + co.c_nm2) * ymax;
    CHECK(std::abs(out - q(t_np1)) <= 1e-12 * scale);
  }
}

TEST_CASE("interpolation stencil") {
  const double w = 2.5;
  CHECK(stencil_I(w, w, w) == doctest::Approx(w).epsilon(1e-15));
  // w(t) = t^2 at 2dt, dt, 0: expect 5 dt^2, gap dt^2 over the point value
  const double dt = 0.3;
  const double i_val = stencil_I(4.0 * dt * dt, dt * dt, 0.0);
  CHECK(i_val == doctest::Approx(5.0 * dt * dt).epsilon(1e-14));
  CHECK(i_val - 4.0 * dt * dt == doctest::Approx(dt * dt).epsilon(1e-12));
  // linear data is reproduced exactly
  const double lin = stencil_I(2.0 * dt, dt, 0.0);
  CHECK(lin == doctest::Approx(2.0 * dt).epsilon(1e-14));
}

TEST_CASE("difference stencil") {
  CHECK(stencil_D(1.5, 1.5, 1.5) == 0.0);
  const double dt = 0.25;
  // t^2: D/dt equals the derivative at the newest point exactly
  const double d2 = stencil_D(4.0 * dt * dt, dt * dt, 0.0) / dt;
  CHECK(d2 == doctest::Approx(4.0 * dt).epsilon(1e-13));
  // t^3: D/dt = 10 dt^2 against the true 12 dt^2, error -2 dt^2
  const double d3 = stencil_D(8.0 * dt * dt * dt, dt * dt * dt, 0.0) / dt;
  CHECK(d3 == doctest::Approx(10.0 * dt * dt).epsilon(1e-13));
  CHECK(d3 - 12.0 * dt * dt == doctest::Approx(-2.0 * dt * dt).epsilon(1e-12));
}

TEST_CASE("filters operate on vector states") {
  Vec be{4.0, 8.0}, yn{2.0, 4.0}, ym{1.0, 2.0};
  Vec out = filter_order2(be, yn, ym, 1.0);
  CHECK(out[0] == doctest::Approx(11.0 / 3.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(22.0 / 3.0).epsilon(1e-15));
}
