#include "tfilt/spectral/nse.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tfilt/csv.hpp"
#include "tfilt/filters.hpp"

namespace tfilt::spectral {

namespace {

using Cplx = std::complex<double>;

inline std::size_t idx_of(int i, int j, int n) {
  return static_cast<std::size_t>(j) * n + i;
}

}  // namespace

SpectralNse::SpectralNse(NseParams params)
    : params_(params), fft_(params.n) {
  const int n = params_.n;
  if (!(params_.nu >= 0.0))
    throw std::invalid_argument("SpectralNse: nu must be >= 0");
  kx_.resize(n);
  ky_.resize(n);
  for (int i = 0; i < n; ++i) kx_[i] = wavenumber(i, n);
  for (int j = 0; j < n; ++j) ky_[j] = wavenumber(j, n);
  keep_.assign(static_cast<std::size_t>(n) * n, 0);
  const int kmax = dealias_kmax(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      keep_[idx_of(i, j, n)] =
          (std::abs(wavenumber(i, n)) <= kmax && std::abs(wavenumber(j, n)) <= kmax)
              ? 1
              : 0;
}

void SpectralNse::leray_project(SpectralField& f) const {
  const int n = params_.n;
#pragma omp parallel for schedule(static) if (n >= 64)
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double kx = kx_[i], ky = ky_[j];
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) continue;
      const std::size_t id = idx_of(i, j, n);
      const Cplx d = (kx * f.u[id] + ky * f.v[id]) / k2;
      f.u[id] -= kx * d;
      f.v[id] -= ky * d;
    }
  }
}

void SpectralNse::dealias(SpectralField& f) const {
  const int n = params_.n;
#pragma omp parallel for schedule(static) if (n >= 64)
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t id = idx_of(i, j, n);
      if (!keep_[id]) {
        f.u[id] = 0.0;
        f.v[id] = 0.0;
      }
    }
  }
}

namespace {

/// B(a, b) = a . grad b + 1/2 (div a) b, dealiased pseudo-spectral product.
SpectralField convection(const SpectralNse& nse, const Fft2d& fft,
                         std::span<const double> kx, std::span<const double> ky,
                         const SpectralField& a, const SpectralField& b) {
  const int n = a.n;
  const std::size_t total = static_cast<std::size_t>(n) * n;
  std::vector<Cplx> ax(a.u), ay(a.v);
  std::vector<Cplx> bx_dx(total), bx_dy(total), by_dx(total), by_dy(total);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t id = idx_of(i, j, n);
      const Cplx iu(0.0, 1.0);
      bx_dx[id] = iu * kx[i] * b.u[id];
      bx_dy[id] = iu * ky[j] * b.u[id];
      by_dx[id] = iu * kx[i] * b.v[id];
      by_dy[id] = iu * ky[j] * b.v[id];
    }
  }
  fft.to_physical(ax.data());
  fft.to_physical(ay.data());
  fft.to_physical(bx_dx.data());
  fft.to_physical(bx_dy.data());
  fft.to_physical(by_dx.data());
  fft.to_physical(by_dy.data());

  SpectralField out(n);
#pragma omp parallel for schedule(static) if (n >= 64)
  for (std::ptrdiff_t id = 0; id < static_cast<std::ptrdiff_t>(total); ++id) {
    const double pax = ax[id].real();
    const double pay = ay[id].real();
    out.u[id] = Cplx(pax * bx_dx[id].real() + pay * bx_dy[id].real(), 0.0);
    out.v[id] = Cplx(pax * by_dx[id].real() + pay * by_dy[id].real(), 0.0);
  }
  // Divergence correction 1/2 (div a) b; div a needs a's own derivatives.
  std::vector<Cplx> ax_dx(total), ay_dy(total);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t id = idx_of(i, j, n);
      const Cplx iu(0.0, 1.0);
      ax_dx[id] = iu * kx[i] * a.u[id];
      ay_dy[id] = iu * ky[j] * a.v[id];
    }
  }
  fft.to_physical(ax_dx.data());
  fft.to_physical(ay_dy.data());
  std::vector<Cplx> bux(b.u), bvy(b.v);
  fft.to_physical(bux.data());
  fft.to_physical(bvy.data());
#pragma omp parallel for schedule(static) if (n >= 64)
  for (std::ptrdiff_t id = 0; id < static_cast<std::ptrdiff_t>(total); ++id) {
    const double half_div = 0.5 * (ax_dx[id].real() + ay_dy[id].real());
    out.u[id] += Cplx(half_div * bux[id].real(), 0.0);
    out.v[id] += Cplx(half_div * bvy[id].real(), 0.0);
  }
  fft.to_spectral(out.u.data());
  fft.to_spectral(out.v.data());
  nse.dealias(out);
  return out;
}

}  // namespace

SpectralField SpectralNse::nonlinear_term(const SpectralField& u) const {
  return convection(*this, fft_, kx_, ky_, u, u);
}

SpectralField SpectralNse::project_forcing(double t, const Forcing* f) const {
  SpectralField out(params_.n);
  if (f && *f) {
    (*f)(t, out);
    dealias(out);
    leray_project(out);
  }
  return out;
}

PressureField SpectralNse::pressure_from_momentum(const SpectralField& u,
                                                  double t,
                                                  const Forcing* f) const {
  const int n = params_.n;
  SpectralField conv = convection(*this, fft_, kx_, ky_, u, u);
  SpectralField fr(n);
  if (f && *f) {
    (*f)(t, fr);
    dealias(fr);
  }
  PressureField p(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double kx = kx_[i], ky = ky_[j];
      const double k2 = kx * kx + ky * ky;
      const std::size_t id = idx_of(i, j, n);
      if (k2 == 0.0 || !keep_[id]) {
        p.p[id] = 0.0;
        continue;
      }
      const Cplx iu(0.0, 1.0);
      const Cplx rhs = iu * (kx * (conv.u[id] - fr.u[id]) +
                             ky * (conv.v[id] - fr.v[id]));
      p.p[id] = rhs / k2;
    }
  }
  return p;
}

NseStepResult SpectralNse::be_step(const SpectralField& u_n, double t_n,
                                   double dt, Variant variant,
                                   const SpectralField* u_star,
                                   const Forcing* f) const {
  if (!(dt > 0.0)) throw std::invalid_argument("be_step: dt must be positive");
  if (variant == Variant::LinearlyImplicit && u_star == nullptr)
    throw std::invalid_argument("be_step: linearly implicit needs u_star");
  const int n = params_.n;
  const double t_next = t_n + dt;
  const double nu = params_.nu;

  SpectralField f_raw(n);
  if (f && *f) {
    (*f)(t_next, f_raw);
    dealias(f_raw);
  }
  SpectralField f_proj = f_raw;
  leray_project(f_proj);

  NseStepResult out{u_n, PressureField(n), SolverReport{}};
  SpectralField& u = out.u;
  dealias(u);
  SpectralField conv_raw(n);

  for (int it = 0; it < params_.max_iterations; ++it) {
    const SpectralField& advecting =
        variant == Variant::LinearlyImplicit ? *u_star : u;
    conv_raw = convection(*this, fft_, kx_, ky_, advecting, u);
    SpectralField conv = conv_raw;
    leray_project(conv);

    // True step residual at the current iterate:
    //   R = u - u_n + dt (P B + nu |k|^2 u - P f)
    double res_sq = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t id = idx_of(i, j, n);
        if (!keep_[id]) continue;
        const double k2 = kx_[i] * kx_[i] + ky_[j] * ky_[j];
        const Cplx ru = u.u[id] - u_n.u[id] +
                        dt * (conv.u[id] + nu * k2 * u.u[id] - f_proj.u[id]);
        const Cplx rv = u.v[id] - u_n.v[id] +
                        dt * (conv.v[id] + nu * k2 * u.v[id] - f_proj.v[id]);
        res_sq += std::norm(ru) + std::norm(rv);
      }
    }
    const double res = two_pi * std::sqrt(res_sq);
    out.report.iterations = it;
    out.report.final_residual = res;
    if (!std::isfinite(res)) break;
    if (res <= params_.solver_tol) {
      out.report.converged = true;
      break;
    }

    // Picard update: (1 + nu dt |k|^2) u_next = u_n + dt (P f - P B).
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t id = idx_of(i, j, n);
        if (!keep_[id]) {
          u.u[id] = 0.0;
          u.v[id] = 0.0;
          continue;
        }
        const double k2 = kx_[i] * kx_[i] + ky_[j] * ky_[j];
        const double den = 1.0 + nu * dt * k2;
        u.u[id] = (u_n.u[id] + dt * (f_proj.u[id] - conv.u[id])) / den;
        u.v[id] = (u_n.v[id] + dt * (f_proj.v[id] - conv.v[id])) / den;
      }
    }
  }

  // Pressure from the momentum balance at the returned iterate. conv_raw
  // already holds B evaluated there when converged on the residual check.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double kx = kx_[i], ky = ky_[j];
      const double k2 = kx * kx + ky * ky;
      const std::size_t id = idx_of(i, j, n);
      if (k2 == 0.0 || !keep_[id]) {
        out.p.p[id] = 0.0;
        continue;
      }
      const Cplx iu(0.0, 1.0);
      out.p.p[id] = iu * (kx * (conv_raw.u[id] - f_raw.u[id]) +
                          ky * (conv_raw.v[id] - f_raw.v[id])) / k2;
    }
  }
  return out;
}

NseStepResult SpectralNse::one_leg_step(const SpectralField& u_n,
                                        const SpectralField& u_nm1,
                                        const PressureField& p_n,
                                        const PressureField& p_nm1, double t_n,
                                        double dt, PressureOption option,
                                        const Forcing* f) const {
  const int n = params_.n;
  const double t_next = t_n + dt;
  const double nu = params_.nu;

  SpectralField f_raw(n);
  if (f && *f) {
    (*f)(t_next, f_raw);
    dealias(f_raw);
  }
  SpectralField f_proj = f_raw;
  leray_project(f_proj);

  NseStepResult out{u_n, PressureField(n), SolverReport{}};
  SpectralField& y = out.u;
  dealias(y);
  SpectralField conv_raw(n);

  for (int it = 0; it < params_.max_iterations; ++it) {
    const SpectralField interp =
        linear_combine<SpectralField>({1.5, -1.0, 0.5}, {&y, &u_n, &u_nm1});
    conv_raw = convection(*this, fft_, kx_, ky_, interp, interp);
    SpectralField conv = conv_raw;
    leray_project(conv);

    // R = 3/2 y - 2 u^n + 1/2 u^{n-1} + dt (P B + nu |k|^2 I[y] - P f)
    double res_sq = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t id = idx_of(i, j, n);
        if (!keep_[id]) continue;
        const double k2 = kx_[i] * kx_[i] + ky_[j] * ky_[j];
        const Cplx iu_c = 1.5 * y.u[id] - u_n.u[id] + 0.5 * u_nm1.u[id];
        const Cplx iv_c = 1.5 * y.v[id] - u_n.v[id] + 0.5 * u_nm1.v[id];
        const Cplx ru = 1.5 * y.u[id] - 2.0 * u_n.u[id] + 0.5 * u_nm1.u[id] +
                        dt * (conv.u[id] + nu * k2 * iu_c - f_proj.u[id]);
        const Cplx rv = 1.5 * y.v[id] - 2.0 * u_n.v[id] + 0.5 * u_nm1.v[id] +
                        dt * (conv.v[id] + nu * k2 * iv_c - f_proj.v[id]);
        res_sq += std::norm(ru) + std::norm(rv);
      }
    }
    const double res = two_pi * std::sqrt(res_sq);
    out.report.iterations = it;
    out.report.final_residual = res;
    if (!std::isfinite(res)) break;
    if (res <= params_.solver_tol) {
      out.report.converged = true;
      break;
    }

    // 3/2 (1 + nu dt k^2) y = 2 u^n - 1/2 u^{n-1}
    //                         + nu dt k^2 (u^n - 1/2 u^{n-1}) - dt B + dt P f
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t id = idx_of(i, j, n);
        if (!keep_[id]) {
          y.u[id] = 0.0;
          y.v[id] = 0.0;
          continue;
        }
        const double k2 = kx_[i] * kx_[i] + ky_[j] * ky_[j];
        const double vis = nu * dt * k2;
        const double den = 1.5 * (1.0 + vis);
        y.u[id] = (2.0 * u_n.u[id] - 0.5 * u_nm1.u[id] +
                   vis * (u_n.u[id] - 0.5 * u_nm1.u[id]) +
                   dt * (f_proj.u[id] - conv.u[id])) /
                  den;
        y.v[id] = (2.0 * u_n.v[id] - 0.5 * u_nm1.v[id] +
                   vis * (u_n.v[id] - 0.5 * u_nm1.v[id]) +
                   dt * (f_proj.v[id] - conv.v[id])) /
                  den;
      }
    }
  }

  // Pressure multiplier: q solves |k|^2 q = i k . (B_raw - f_raw). Option A
  // takes p^{n+1} = q; option B's filtered pressure satisfies I[p^{n+1}] = q.
  PressureField q(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double kx = kx_[i], ky = ky_[j];
      const double k2 = kx * kx + ky * ky;
      const std::size_t id = idx_of(i, j, n);
      if (k2 == 0.0 || !keep_[id]) {
        q.p[id] = 0.0;
        continue;
      }
      const Cplx iu(0.0, 1.0);
      q.p[id] = iu * (kx * (conv_raw.u[id] - f_raw.u[id]) +
                      ky * (conv_raw.v[id] - f_raw.v[id])) / k2;
    }
  }
  if (option == PressureOption::A) {
    out.p = q;
  } else {
    out.p = PressureField(n);
    const std::size_t total = static_cast<std::size_t>(n) * n;
    for (std::size_t id = 0; id < total; ++id)
      out.p.p[id] =
          (2.0 / 3.0) * (q.p[id] + p_n.p[id] - 0.5 * p_nm1.p[id]);
  }
  return out;
}

Problem<SpectralField> SpectralNse::make_problem(Forcing f) const {
  Problem<SpectralField> p;
  p.dimension = 2 * static_cast<std::size_t>(params_.n) * params_.n;
  const SpectralNse* self = this;
  auto shared_f = std::make_shared<Forcing>(std::move(f));
  p.rhs = [self, shared_f](double t, const SpectralField& u) {
    SpectralField conv = self->nonlinear_term(u);
    self->leray_project(conv);
    SpectralField fp = self->project_forcing(t, shared_f.get());
    const int n = self->params_.n;
    SpectralField out(n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t id = idx_of(i, j, n);
        if (!self->keep_[id]) continue;
        const double k2 =
            self->kx_[i] * self->kx_[i] + self->ky_[j] * self->ky_[j];
        out.u[id] = fp.u[id] - conv.u[id] - self->params_.nu * k2 * u.u[id];
        out.v[id] = fp.v[id] - conv.v[id] - self->params_.nu * k2 * u.v[id];
      }
    }
    return out;
  };
  p.implicit_solve = [self, shared_f](double t, const SpectralField& y_prev,
                                      double dt, const SpectralField* lin) {
    const Variant variant =
        lin ? Variant::LinearlyImplicit : Variant::Implicit;
    NseStepResult r =
        self->be_step(y_prev, t - dt, dt, variant, lin, shared_f.get());
    return StepResult<SpectralField>{std::move(r.u), r.report};
  };
  return p;
}

void SpectralNse::to_physical(const SpectralField& f, std::vector<double>& ux,
                              std::vector<double>& uy) const {
  const std::size_t total = f.modes();
  std::vector<Cplx> a(f.u), b(f.v);
  fft_.to_physical(a.data());
  fft_.to_physical(b.data());
  ux.resize(total);
  uy.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    ux[i] = a[i].real();
    uy[i] = b[i].real();
  }
}

void SpectralNse::scalar_to_physical(const PressureField& p,
                                     std::vector<double>& out) const {
  std::vector<Cplx> a(p.p);
  fft_.to_physical(a.data());
  out.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
}

FilteredPair filter_step_nse(const SpectralField& u_be, const SpectralField& u_n,
                             const SpectralField& u_nm1, const PressureField& p_be,
                             const PressureField& p_n, const PressureField& p_nm1,
                             double r_cur, PressureOption option) {
  FilteredPair out;
  // Fused single-pass form of filter_order2; identical arithmetic order, no
  // intermediate field (the per-step filter cost is part of the method's
  // advertised overhead).
  const double w = filter_weight(r_cur);
  const double rp1 = 1.0 + r_cur;
  out.u = SpectralField(u_be.n);
  const std::size_t nm = u_be.modes();
#pragma omp parallel for schedule(static) if (nm >= 4096)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nm); ++i) {
    const Cplx bu = (u_be.u[i] + (-rp1) * u_n.u[i]) + r_cur * u_nm1.u[i];
    const Cplx bv = (u_be.v[i] + (-rp1) * u_n.v[i]) + r_cur * u_nm1.v[i];
    out.u.u[i] = u_be.u[i] + (-w) * bu;
    out.u.v[i] = u_be.v[i] + (-w) * bv;
  }
  if (option == PressureOption::A) {
    out.p = p_be;  // pass-through, bit for bit
  } else {
    const double w = filter_weight(r_cur);
    out.p = PressureField(p_be.n);
    const std::size_t total = p_be.p.size();
    for (std::size_t i = 0; i < total; ++i)
      out.p.p[i] = p_be.p[i] - w * (p_be.p[i] - (1.0 + r_cur) * p_n.p[i] +
                                    r_cur * p_nm1.p[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

SpectralField taylor_green_velocity(int n, double amplitude) {
  SpectralField f(n);
  // cos x sin y = sum_{s1,s2} (-i s2 / 4) e^{i(s1 x + s2 y)}
  // sin x cos y = sum_{s1,s2} (-i s1 / 4) e^{i(s1 x + s2 y)}
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      const int i = s1 == 1 ? 1 : n - 1;
      const int j = s2 == 1 ? 1 : n - 1;
      const std::size_t id = idx_of(i, j, n);
      f.u[id] = amplitude * Cplx(0.0, -0.25 * s2);
      f.v[id] = -amplitude * Cplx(0.0, -0.25 * s1);
    }
  }
  return f;
}

PressureField taylor_green_pressure(int n, double amplitude) {
  PressureField p(n);
  // -(amplitude/4)(cos 2x + cos 2y)
  const double c = -amplitude / 8.0;
  p.p[idx_of(2, 0, n)] = c;
  p.p[idx_of(n - 2, 0, n)] = c;
  p.p[idx_of(0, 2, n)] = c;
  p.p[idx_of(0, n - 2, n)] = c;
  return p;
}

SpectralField taylor_green_exact_velocity(int n, double nu, double t) {
  return taylor_green_velocity(n, std::exp(-2.0 * nu * t));
}

PressureField taylor_green_exact_pressure(int n, double nu, double t) {
  return taylor_green_pressure(n, std::exp(-4.0 * nu * t));
}

double transition_g(double t) {
  if (t <= 0.0) return 0.0;
  const double s = std::pow(10.0 * t, -10.0);
  if (s > 700.0) return 0.0;
  return std::exp(-s);
}

double transition_g_prime(double t) {
  if (t <= 0.0) return 0.0;
  const double s = std::pow(10.0 * t, -10.0);
  if (s > 700.0) return 0.0;
  return std::exp(-s) * 100.0 * std::pow(10.0 * t, -11.0);
}

double TwoPlateau::value(double t) const {
  return transition_g(t - t_rise) * transition_g(t_fall - t);
}

double TwoPlateau::derivative(double t) const {
  return transition_g_prime(t - t_rise) * transition_g(t_fall - t) -
         transition_g(t - t_rise) * transition_g_prime(t_fall - t);
}

Forcing ForcedVortexProblem::forcing(int n) const {
  auto F = amplitude;
  auto Fp = amplitude_rate;
  const double nu_ = nu;
  return [n, F, Fp, nu_](double t, SpectralField& out) {
    out = taylor_green_velocity(n, 2.0 * nu_ * F(t) + Fp(t));
  };
}

SpectralField ForcedVortexProblem::exact_velocity(int n, double t) const {
  return taylor_green_velocity(n, amplitude(t));
}

SpectralField random_solenoidal(int n, double l2_norm, std::uint64_t seed) {
  SpectralField f(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int kmax = dealias_kmax(n);
  const double k0 = std::max(2.0, kmax / 3.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int kx = wavenumber(i, n), ky = wavenumber(j, n);
      if (std::abs(kx) > kmax || std::abs(ky) > kmax) continue;
      if (kx == 0 && ky == 0) continue;
      const double env = std::exp(-(kx * kx + ky * ky) / (2.0 * k0 * k0));
      const std::size_t id = idx_of(i, j, n);
      f.u[id] = env * Cplx(gauss(rng), gauss(rng));
      f.v[id] = env * Cplx(gauss(rng), gauss(rng));
    }
  }
  // Hermitian symmetrization, then projection onto solenoidal fields.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int in = (n - i) % n, jn = (n - j) % n;
      const std::size_t a = idx_of(i, j, n), b = idx_of(in, jn, n);
      if (a < b) {
        f.u[b] = std::conj(f.u[a]);
        f.v[b] = std::conj(f.v[a]);
      } else if (a == b) {
        f.u[a] = Cplx(f.u[a].real(), 0.0);
        f.v[a] = Cplx(f.v[a].real(), 0.0);
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double kx = wavenumber(i, n), ky = wavenumber(j, n);
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) continue;
      const std::size_t id = idx_of(i, j, n);
      const Cplx d = (kx * f.u[id] + ky * f.v[id]) / k2;
      f.u[id] -= kx * d;
      f.v[id] -= ky * d;
    }
  }
  const double cur = norm_l2(f);
  if (cur > 0.0) {
    const double s = l2_norm / cur;
    for (auto& c : f.u) c *= s;
    for (auto& c : f.v) c *= s;
  }
  return f;
}

// ---------------------------------------------------------------------------

EnergyLedger energy_ledger(const SpectralNse& nse,
                           std::span<const SpectralField> states, double t0,
                           double dt, const Forcing* f) {
  if (states.size() < 3)
    throw std::invalid_argument("energy_ledger: need at least u^0, u^1, u^2");
  EnergyLedger led;
  const auto energy = [&](const SpectralField& a, const SpectralField& b) {
    const SpectralField two_minus = linear_combine<SpectralField>({2.0, -1.0}, {&a, &b});
    const SpectralField diff = linear_combine<SpectralField>({1.0, -1.0}, {&a, &b});
    return 0.25 * (inner(a, a) + inner(two_minus, two_minus) + inner(diff, diff));
  };
  const double nu = nse.params().nu;
  led.e_first = energy(states[1], states[0]);
  double acc = 0.0;
  for (std::size_t m = 2; m < states.size(); ++m) {
    EnergyLedgerRow row;
    row.step = static_cast<int>(m);
    row.t = t0 + dt * static_cast<double>(m);
    row.energy = energy(states[m], states[m - 1]);
    const SpectralField interp = linear_combine<SpectralField>(
        {1.5, -1.0, 0.5}, {&states[m], &states[m - 1], &states[m - 2]});
    row.viscous = dt * nu * grad_norm_sq(interp);
    const SpectralField second_diff = linear_combine<SpectralField>(
        {1.0, -2.0, 1.0}, {&states[m], &states[m - 1], &states[m - 2]});
    row.numerical = 0.75 * inner(second_diff, second_diff);
    if (f && *f) {
      SpectralField feff(states[m].n);
      (*f)(row.t, feff);
      nse.dealias(feff);
      nse.leray_project(feff);
      row.work = dt * inner(feff, interp);
    }
    acc += row.viscous + row.numerical - row.work;
    led.rows.push_back(row);
  }
  led.e_last = led.rows.back().energy;
  led.residual = led.e_last + acc - led.e_first;
  led.relative_residual = std::abs(led.residual) / led.e_first;
  return led;
}

// ---------------------------------------------------------------------------

ConstantRunResult run_constant(const SpectralNse& nse, const SpectralField& u0,
                               double t0, const Forcing* f,
                               const ConstantRunConfig& cfg,
                               const NseObserver& observer) {
  if (!(cfg.dt > 0.0) || !(cfg.T > t0))
    throw std::invalid_argument("run_constant: bad dt or horizon");
  ConstantRunResult res;
  detail::ScopedTimer total(res.stats.wall_seconds);
  res.t0 = t0;

  SpectralField u_n = u0;
  nse.dealias(u_n);
  PressureField p0 = nse.pressure_from_momentum(u_n, t0, f);
  SpectralField u_nm1(0);
  PressureField pb_n = p0, pb_nm1(0);
  double t = t0, t_prev = t0;
  res.p_final_a = p0;
  res.p_final_b = p0;
  if (cfg.record_states) res.states.push_back(u_n);
  if (observer) observer(0, t0, u_n, p0, p0);

  int step = 0;
  while (t < cfg.T) {
    const double remaining = cfg.T - t;
    const bool landing = remaining <= cfg.dt * (1.0 + 1e-12);
    const double dt_step = landing ? remaining : cfg.dt;
    const double t_new = landing ? cfg.T : t + dt_step;
    ++step;

    // Filtered runs start from a Richardson-extrapolated doubling step so the
    // first state is second-order accurate and never dominates the error.
    if (cfg.filtered && step == 1) {
      NseStepResult full, h1, h2;
      {
        detail::ScopedTimer bt(res.stats.be_solve_seconds);
        full = nse.be_step(u_n, t, dt_step, Variant::Implicit, nullptr, f);
        h1 = nse.be_step(u_n, t, 0.5 * dt_step, Variant::Implicit, nullptr, f);
        h2 = nse.be_step(h1.u, t + 0.5 * dt_step, 0.5 * dt_step,
                         Variant::Implicit, nullptr, f);
      }
      res.stats.solver_iterations += full.report.iterations +
                                     h1.report.iterations +
                                     h2.report.iterations;
      if (!full.report.converged || !h1.report.converged ||
          !h2.report.converged) {
        res.ok = false;
        res.error = "solver failed to converge in startup";
        res.u_final = u_n;
        return res;
      }
      SpectralField u1 =
          linear_combine<SpectralField>({2.0, -1.0}, {&h2.u, &full.u});
      PressureField p1 = nse.pressure_from_momentum(u1, t_new, f);
      u_nm1 = std::move(u_n);
      u_n = std::move(u1);
      pb_nm1 = std::move(pb_n);
      pb_n = p1;
      t_prev = t;
      t = t_new;
      res.stats.accepted += 1;
      if (cfg.record_states) res.states.push_back(u_n);
      if (observer) observer(step, t, u_n, p1, pb_n);
      res.p_final_a = std::move(p1);
      continue;
    }

    NseStepResult be;
    {
      detail::ScopedTimer bt(res.stats.be_solve_seconds);
      const SpectralField* star = nullptr;
      SpectralField star_store;
      if (cfg.variant == Variant::LinearlyImplicit && step >= 2) {
        const double r = dt_step / (t - t_prev);
        star_store = linearization_point(u_n, u_nm1, r);
        star = &star_store;
      }
      be = nse.be_step(u_n, t, dt_step,
                       star ? Variant::LinearlyImplicit : Variant::Implicit,
                       star, f);
    }
    res.stats.solver_iterations += be.report.iterations;
    if (!be.report.converged) {
      res.ok = false;
      res.error = "solver failed to converge at t=" + std::to_string(t);
      res.u_final = u_n;
      return res;
    }

    SpectralField u_new;
    PressureField pa_new = be.p, pb_new;
    if (!cfg.filtered || step < 2) {
      u_new = std::move(be.u);
      pb_new = pa_new;
    } else {
      detail::ScopedTimer ft(res.stats.filter_seconds);
      const double r = dt_step / (t - t_prev);
      FilteredPair fp = filter_step_nse(be.u, u_n, u_nm1, be.p, pb_n, pb_nm1,
                                        r, PressureOption::B);
      u_new = std::move(fp.u);
      pb_new = std::move(fp.p);
    }

    u_nm1 = std::move(u_n);
    u_n = std::move(u_new);
    pb_nm1 = std::move(pb_n);
    pb_n = std::move(pb_new);
    t_prev = t;
    t = t_new;
    res.stats.accepted += 1;
    if (cfg.record_states) res.states.push_back(u_n);
    if (observer) observer(step, t, u_n, pa_new, pb_n);
    res.p_final_a = std::move(pa_new);
  }

  res.ok = true;
  res.u_final = u_n;
  res.p_final_b = pb_n;
  return res;
}

void write_snapshot_csv(const std::string& path, const SpectralNse& nse,
                        const SpectralField& u, const PressureField& p,
                        double t) {
  const int n = nse.n();
  std::vector<double> ux, uy, pp;
  nse.to_physical(u, ux, uy);
  nse.scalar_to_physical(p, pp);
  csv::Table tab;
  tab.header = {"n", "t", "i", "j", "x", "y", "u", "v", "p"};
  const double h = two_pi / n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t id = idx_of(i, j, n);
      tab.rows.push_back({static_cast<std::int64_t>(n), t,
                          static_cast<std::int64_t>(i),
                          static_cast<std::int64_t>(j), i * h, j * h, ux[id],
                          uy[id], pp[id]});
    }
  }
  csv::write_file(path, tab);
}

}  // namespace tfilt::spectral
