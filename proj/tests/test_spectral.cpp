#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "tfilt/csv.hpp"
#include "tfilt/filters.hpp"
#include "tfilt/spectral/nse.hpp"
#include "tfilt/verify.hpp"

using namespace tfilt;
using namespace tfilt::spectral;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("Taylor-Green fields: point values, energy, divergence") {
  const int n = 32;
  SpectralNse nse({n, 1.0, 1e-12, 50});
  const SpectralField u = taylor_green_velocity(n, 1.0);

  std::vector<double> ux, uy;
  nse.to_physical(u, ux, uy);
  // grid point (x, y) = (0, pi/2) is (i, j) = (0, n/4)
  const std::size_t id = static_cast<std::size_t>(n / 4) * n + 0;
  CHECK(ux[id] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(uy[id]) <= 1e-12);

  // kinetic energy (1/2)||u||^2 over the box is pi^2
  CHECK(0.5 * inner(u, u) == doctest::Approx(kPi * kPi).epsilon(1e-12));

  CHECK(divergence_rel(u) <= 1e-15);
  CHECK(hermitian_defect(u) <= 1e-15);
}

TEST_CASE("distinct Fourier modes are orthogonal") {
  const int n = 16;
  SpectralField a(n), b(n);
  a.u[1] = std::complex<double>(0.0, 1.0);                    // mode (1,0)
  b.u[static_cast<std::size_t>(2) * n + 0] = 1.0;             // mode (0,2)
  CHECK(inner(a, b) == 0.0);
  CHECK(inner(a, a) > 0.0);
}

TEST_CASE("Leray projection on single modes") {
  const int n = 16;
  SpectralNse nse({n, 1.0, 1e-12, 50});
  SpectralField f(n);
  // mode k = (1, 0), u = (0, 1): already solenoidal
  f.u[1] = 0.0;
  f.v[1] = 1.0;
  SpectralField g = f;
  nse.leray_project(g);
  CHECK(std::abs(g.v[1] - std::complex<double>(1.0)) <= 1e-15);
  CHECK(std::abs(g.u[1]) <= 1e-15);
  // mode k = (1, 0), u = (1, 0): a pure gradient, projected away
  SpectralField h(n);
  h.u[1] = 1.0;
  nse.leray_project(h);
  CHECK(std::abs(h.u[1]) <= 1e-15);
  CHECK(std::abs(h.v[1]) <= 1e-15);
}

TEST_CASE("Leray projection: random fields become solenoidal, idempotent") {
  const int n = 32;
  SpectralNse nse({n, 1.0, 1e-12, 50});
  SpectralField f = random_solenoidal(n, 1.0, 7);
  // random_solenoidal already projects; perturb it off the constraint
  f.u[3] += std::complex<double>(0.3, -0.2);
  SpectralField g = f;
  nse.leray_project(g);
  CHECK(divergence_rel(g) <= 1e-12);
  SpectralField g2 = g;
  nse.leray_project(g2);
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    CHECK(std::abs(g2.u[i] - g.u[i]) <= 1e-15);
    CHECK(std::abs(g2.v[i] - g.v[i]) <= 1e-15);
  }
}

TEST_CASE("nonlinear term: zero input, Taylor-Green gradient, energy neutrality") {
  const int n = 32;
  SpectralNse nse({n, 1.0, 1e-12, 50});

  SpectralField z(n);
  SpectralField nz = nse.nonlinear_term(z);
  CHECK(norm_l2(nz) == 0.0);

  // the Taylor-Green convection term is a pure gradient: projection kills it
  SpectralField tg = taylor_green_velocity(n, 1.0);
  SpectralField ntg = nse.nonlinear_term(tg);
  const double raw = norm_l2(ntg);
  nse.leray_project(ntg);
  CHECK(raw > 0.1);  // the unprojected term itself is not small
  CHECK(norm_l2(ntg) <= 1e-13 * std::max(1.0, raw));

  // skew symmetry makes the projected term energy neutral
  SpectralField u = random_solenoidal(n, 1.0, 21);
  SpectralField nu_term = nse.nonlinear_term(u);
  nse.leray_project(nu_term);
  const double scale =
      norm_l2(u) * norm_l2(u) * std::sqrt(grad_norm_sq(u));
  CHECK(std::abs(inner(nu_term, u)) <= 1e-12 * scale);
}

TEST_CASE("backward Euler NSE step: Taylor-Green amplitude recurrence") {
  const int n = 32;
  const double nu = 0.5, dt = 0.01;
  SpectralNse nse({n, nu, 1e-12, 50});
  const SpectralField u0 = taylor_green_velocity(n, 1.0);
  auto r = nse.be_step(u0, 0.0, dt, Variant::Implicit, nullptr, nullptr);
  REQUIRE(r.report.converged);
  // the vortex mode decays by exactly 1/(1 + 2 nu dt) per implicit step
  const double expected = 1.0 / (1.0 + 2.0 * nu * dt);
  const double amp = inner(r.u, u0) / inner(u0, u0);
  CHECK(amp == doctest::Approx(expected).epsilon(1e-12));
  CHECK(divergence_rel(r.u) <= 1e-12);

  // pressure of the step matches the vortex pressure at the new amplitude
  const PressureField pex = taylor_green_pressure(n, expected * expected);
  PressureField dp(n);
  for (std::size_t i = 0; i < dp.p.size(); ++i) dp.p[i] = r.p.p[i] - pex.p[i];
  CHECK(pressure_norm_l2(dp) <= 1e-10);
}

TEST_CASE("backward Euler NSE step: zero stays zero") {
  const int n = 16;
  SpectralNse nse({n, 0.1, 1e-12, 50});
  SpectralField z(n);
  auto r = nse.be_step(z, 0.0, 0.02, Variant::Implicit, nullptr, nullptr);
  CHECK(r.report.converged);
  CHECK(norm_l2(r.u) == 0.0);
  CHECK(r.report.iterations == 0);
}

TEST_CASE("Picard iteration converges on a random field") {
  const int n = 64;
  SpectralNse nse({n, 0.01, 1e-12, 50});
  const SpectralField u0 = random_solenoidal(n, 1.0, 3);
  auto r = nse.be_step(u0, 0.0, 1e-3, Variant::Implicit, nullptr, nullptr);
  CHECK(r.report.converged);
  CHECK(r.report.iterations <= 50);
  CHECK(r.report.final_residual <= 1e-12);
}

TEST_CASE("fused field filter equals the generic filter bit for bit") {
  const int n = 32;
  const SpectralField be = random_solenoidal(n, 1.0, 61);
  const SpectralField yn = random_solenoidal(n, 0.9, 62);
  const SpectralField ym = random_solenoidal(n, 0.8, 63);
  PressureField p(n);
  for (double r : {0.5, 1.0, 2.7}) {
    const SpectralField generic = filter_order2(be, yn, ym, r);
    const auto fused = filter_step_nse(be, yn, ym, p, p, p, r,
                                       PressureOption::A);
    for (std::size_t i = 0; i < generic.u.size(); ++i) {
      CHECK(fused.u.u[i] == generic.u[i]);
      CHECK(fused.u.v[i] == generic.v[i]);
    }
  }
}

TEST_CASE("filter step: constant data passes through, option A pressure exact") {
  const int n = 16;
  const SpectralField u = random_solenoidal(n, 1.0, 17);
  PressureField p(n);
  p.p[3] = std::complex<double>(0.5, -0.25);
  auto fp = filter_step_nse(u, u, u, p, p, p, 1.0, PressureOption::A);
  for (std::size_t i = 0; i < u.u.size(); ++i) {
    CHECK(fp.u.u[i] == u.u[i]);
    CHECK(fp.u.v[i] == u.v[i]);
  }
  for (std::size_t i = 0; i < p.p.size(); ++i) CHECK(fp.p.p[i] == p.p[i]);
  auto fb = filter_step_nse(u, u, u, p, p, p, 1.0, PressureOption::B);
  for (std::size_t i = 0; i < p.p.size(); ++i)
    CHECK(std::abs(fb.p.p[i] - p.p[i]) <= 1e-15);
}

TEST_CASE("divergence and Hermitian symmetry survive steps and filters") {
  const int n = 32;
  SpectralNse nse({n, 0.05, 1e-12, 50});
  SpectralField u_nm1 = random_solenoidal(n, 0.8, 5);
  auto first = nse.be_step(u_nm1, 0.0, 0.01, Variant::Implicit, nullptr,
                           nullptr);
  REQUIRE(first.report.converged);
  SpectralField u_n = first.u;
  double t = 0.01;
  for (int s = 0; s < 5; ++s) {
    auto r = nse.be_step(u_n, t, 0.01, Variant::Implicit, nullptr, nullptr);
    REQUIRE(r.report.converged);
    SpectralField filtered = filter_order2(r.u, u_n, u_nm1, 1.0);
    CHECK(divergence_rel(filtered) <= 1e-12);
    CHECK(hermitian_defect(filtered) <= 1e-12);
    u_nm1 = u_n;
    u_n = filtered;
    t += 0.01;
  }
}

TEST_CASE("transition switch values") {
  CHECK(transition_g(-1.0) == 0.0);
  CHECK(transition_g(0.0) == 0.0);
  CHECK(transition_g(5.0) == 1.0);  // saturates in double precision
  CHECK(transition_g(0.5) ==
        doctest::Approx(std::exp(-std::pow(5.0, -10.0))).epsilon(1e-16));
  CHECK(transition_g(0.5) > 1.0 - 2e-7);
  CHECK(transition_g_prime(0.0) == 0.0);
  CHECK(transition_g_prime(1e-40) == 0.0);  // no overflow in the chain rule
  // derivative matches a central difference in the active region
  for (double t : {0.08, 0.12, 0.2, 0.35}) {
    const double h = 1e-7;
    const double fd = (transition_g(t + h) - transition_g(t - h)) / (2.0 * h);
    CHECK(transition_g_prime(t) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("forced vortex: constant amplitude is an equilibrium") {
  const int n = 16;
  const double nu = 0.05, c = 0.7;
  SpectralNse nse({n, nu, 1e-12, 50});
  ForcedVortexProblem fvp{[c](double) { return c; }, [](double) { return 0.0; },
                          nu};
  Forcing f = fvp.forcing(n);
  SpectralField u = taylor_green_velocity(n, c);
  double t = 0.0;
  for (int s = 0; s < 10; ++s) {
    auto r = nse.be_step(u, t, 0.05, Variant::Implicit, nullptr, &f);
    REQUIRE(r.report.converged);
    u = r.u;
    t += 0.05;
  }
  const SpectralField ref = taylor_green_velocity(n, c);
  SpectralField du = linear_combine<SpectralField>({1.0, -1.0}, {&u, &ref});
  CHECK(norm_l2(du) <= 1e-10);
}

TEST_CASE("forced vortex: exponential profile needs no forcing") {
  const double nu = 0.3;
  ForcedVortexProblem fvp{
      [nu](double t) { return std::exp(-2.0 * nu * t); },
      [nu](double t) { return -2.0 * nu * std::exp(-2.0 * nu * t); }, nu};
  Forcing f = fvp.forcing(16);
  SpectralField out(16);
  f(0.37, out);
  CHECK(norm_l2(out) <= 1e-15);
}

TEST_CASE("energy ledger rows on synthetic histories") {
  const int n = 16;
  SpectralNse nse({n, 0.1, 1e-12, 50});
  // ||u||^2 = 2 so the discrete energy of a flat history is exactly 1
  SpectralField u = random_solenoidal(n, std::sqrt(2.0), 23);
  std::vector<SpectralField> states{u, u, u};
  auto led = energy_ledger(nse, states, 0.0, 0.1, nullptr);
  CHECK(led.e_first == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(led.rows.at(0).energy == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(led.rows.at(0).numerical == 0.0);  // zero second difference
  CHECK(led.rows.at(0).work == 0.0);
}

TEST_CASE("discrete energy equals the G quadratic form") {
  const int n = 16;
  const SpectralField a = random_solenoidal(n, 1.0, 31);
  const SpectralField b = random_solenoidal(n, 0.7, 32);
  CHECK(verify::check_g_form(a, b) <=
        1e-12 * std::max({inner(a, a), inner(b, b), 1.0}));
}

TEST_CASE("energy balance closes for an unforced constant-step run") {
  const int n = 64;
  SpectralNse nse({n, 0.1, 1e-12, 50});
  const SpectralField u0 = random_solenoidal(n, 1.0, 41);
  ConstantRunConfig cfg{0.005, 50 * 0.005, Variant::Implicit, true, true};
  auto r = run_constant(nse, u0, 0.0, nullptr, cfg);
  REQUIRE(r.ok);
  REQUIRE(r.states.size() == 51);
  auto led = energy_ledger(nse, r.states, 0.0, 0.005, nullptr);
  CHECK(led.relative_residual <= 1e-10);
  // unforced runs never gain discrete energy, and both dissipation channels
  // stay nonnegative
  double prev = led.e_first;
  for (const auto& row : led.rows) {
    CHECK(row.energy <= prev * (1.0 + 1e-12));
    CHECK(row.viscous >= 0.0);
    CHECK(row.numerical >= 0.0);
    prev = row.energy;
  }
}

TEST_CASE("implicit and linearly implicit variants differ at second order") {
  const int n = 32;
  const double nu = 0.05, T = 0.1;
  SpectralNse nse({n, nu, 1e-13, 100});
  const SpectralField u0 = random_solenoidal(n, 0.5, 51);
  std::vector<double> dts{0.01, 0.005, 0.0025};
  std::vector<double> gaps;
  for (double dt : dts) {
    ConstantRunConfig ci{dt, T, Variant::Implicit, true, false};
    ConstantRunConfig cl{dt, T, Variant::LinearlyImplicit, true, false};
    auto ri = run_constant(nse, u0, 0.0, nullptr, ci);
    auto rl = run_constant(nse, u0, 0.0, nullptr, cl);
    REQUIRE(ri.ok);
    REQUIRE(rl.ok);
    SpectralField du = linear_combine<SpectralField>(
        {1.0, -1.0}, {&ri.u_final, &rl.u_final});
    gaps.push_back(norm_l2(du));
  }
  const double slope = verify::fit_slope_loglog(dts, gaps);
  CHECK(slope >= 1.9);
}

TEST_CASE("snapshot writer produces a full grid table") {
  const int n = 8;
  SpectralNse nse({n, 1.0, 1e-12, 50});
  const SpectralField u = taylor_green_velocity(n, 1.0);
  const PressureField p = taylor_green_pressure(n, 1.0);
  const std::string path = "snapshot_test.csv";
  write_snapshot_csv(path, nse, u, p, 0.25);
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  auto rows = csv::parse(text);
  CHECK(rows.size() == static_cast<std::size_t>(n * n + 1));
  CHECK(rows[0].size() == 9);
  std::remove(path.c_str());
}
