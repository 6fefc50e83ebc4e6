#pragma once

// Pseudo-spectral incompressible Navier-Stokes on the periodic [0, 2pi]^2
// box: the PDE instances for the time-stepping experiments. Velocity lives in
// the exactly divergence-free subspace (Leray projection is diagonal per
// Fourier mode); the skew-symmetric convection term is evaluated physically
// with 2/3-rule dealiasing; pressure is recovered from the momentum balance
// by a spectral Poisson solve with mean-zero gauge.

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "tfilt/driver.hpp"
#include "tfilt/spectral/fft.hpp"
#include "tfilt/spectral/field.hpp"
#include "tfilt/stepper.hpp"

namespace tfilt::spectral {

enum class Variant { Implicit, LinearlyImplicit };
enum class PressureOption { A, B };  // A: pressure left unfiltered

/// Fills a spectral forcing field for time t (already projected or not; the
/// solver projects and dealiases whatever it receives).
using Forcing = std::function<void(double t, SpectralField& f)>;

struct NseParams {
  int n = 64;
  double nu = 1.0;
  double solver_tol = 1e-12;  // absolute, on the L2 norm of the step residual
  int max_iterations = 50;
};

struct NseStepResult {
  SpectralField u;
  PressureField p;
  SolverReport report;
};

class SpectralNse {
 public:
  explicit SpectralNse(NseParams params);

  const NseParams& params() const noexcept { return params_; }
  int n() const noexcept { return params_.n; }

  SpectralField zero_field() const { return SpectralField(params_.n); }

  /// Per-mode projection u <- (I - k k^T / |k|^2) u; removes every gradient
  /// component, idempotent.
  void leray_project(SpectralField& f) const;

  /// Zero all modes outside the 2/3-rule square.
  void dealias(SpectralField& f) const;

  /// Dealiased skew-symmetric convection B(u, u) = u . grad u + 1/2 (div u) u,
  /// evaluated pseudo-spectrally. For exactly solenoidal input the divergence
  /// correction vanishes to rounding.
  SpectralField nonlinear_term(const SpectralField& u) const;

  /// Pressure from the momentum balance of velocity state u at time t:
  /// lap p = div(f - u . grad u); mean-zero gauge.
  PressureField pressure_from_momentum(const SpectralField& u, double t,
                                       const Forcing* f) const;

  /// One backward Euler step to t_next = t + dt (Picard iteration). The
  /// linearly-implicit variant advects by the supplied extrapolated state
  /// u_star instead of the unknown.
  NseStepResult be_step(const SpectralField& u_n, double t_n, double dt,
                        Variant variant, const SpectralField* u_star,
                        const Forcing* f) const;

  /// Constant-step two-step (one-leg) form solved in the u^{n+1} variable;
  /// pressure recovered per option. Used by the equivalence checks.
  NseStepResult one_leg_step(const SpectralField& u_n,
                             const SpectralField& u_nm1,
                             const PressureField& p_n,
                             const PressureField& p_nm1, double t_n, double dt,
                             PressureOption option, const Forcing* f) const;

  /// Adapter for the generic driver. When the driver passes a linearization
  /// point the step runs linearly implicit, otherwise fully implicit.
  Problem<SpectralField> make_problem(Forcing f) const;

  /// Evaluate both components on the physical grid (row-major, n x n x 2).
  void to_physical(const SpectralField& f, std::vector<double>& ux,
                   std::vector<double>& uy) const;
  void scalar_to_physical(const PressureField& p, std::vector<double>& out) const;

 private:
  NseParams params_;
  Fft2d fft_;
  std::vector<double> kx_, ky_;  // wavenumbers per index
  std::vector<unsigned char> keep_;  // dealias mask

  SpectralField project_forcing(double t, const Forcing* f) const;
};

/// Velocity filter plus the chosen pressure treatment; option A passes the
/// incoming pressure through untouched (bit for bit).
struct FilteredPair {
  SpectralField u;
  PressureField p;
};
FilteredPair filter_step_nse(const SpectralField& u_be, const SpectralField& u_n,
                             const SpectralField& u_nm1, const PressureField& p_be,
                             const PressureField& p_n, const PressureField& p_nm1,
                             double r_cur, PressureOption option);

// ---------------------------------------------------------------------------
// Exact fields and forcing constructions.

/// amplitude * (cos x sin y, -sin x cos y), as spectral coefficients.
SpectralField taylor_green_velocity(int n, double amplitude);

/// -(amplitude/4) (cos 2x + cos 2y), as spectral coefficients.
PressureField taylor_green_pressure(int n, double amplitude);

/// Decaying vortex: velocity amplitude e^{-2 nu t}, pressure e^{-4 nu t}.
SpectralField taylor_green_exact_velocity(int n, double nu, double t);
PressureField taylor_green_exact_pressure(int n, double nu, double t);

/// Smooth switch: 0 for t <= 0, exp(-1/(10 t)^10) above; equals 1 to double
/// precision by t = 5 and transitions essentially inside t in [0.05, 0.4].
double transition_g(double t);
double transition_g_prime(double t);

/// Two-plateau amplitude profile F(t) = g(t - t_rise) * g(t_fall - t).
struct TwoPlateau {
  double t_rise = 0.3;
  double t_fall = 2.7;
  double value(double t) const;
  double derivative(double t) const;
};

/// Body force (2 nu F + F') * (cos x sin y, -sin x cos y); with u(0) equal to
/// F(0) times the vortex mode the exact solution amplitude is F(t).
struct ForcedVortexProblem {
  std::function<double(double)> amplitude;        // F
  std::function<double(double)> amplitude_rate;   // F'
  double nu = 0.01;

  Forcing forcing(int n) const;
  SpectralField exact_velocity(int n, double t) const;
};

/// Seeded random smooth solenoidal field (dealiased, zero mean) with L2 norm
/// scaled to `l2_norm`.
SpectralField random_solenoidal(int n, double l2_norm, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Energy bookkeeping for constant-step runs.

struct EnergyLedgerRow {
  int step = 0;     // row for the transition u^{step-1}, u^step -> u^{step+1}? see below
  double t = 0.0;   // time of the newest state entering the row
  double energy = 0.0;       // E^m from (u^m, u^{m-1})
  double viscous = 0.0;      // D^m   = dt nu ||grad I[u^m]||^2
  double numerical = 0.0;    // Z^m   = 3/4 ||u^m - 2u^{m-1} + u^{m-2}||^2
  double work = 0.0;         // W^m   = dt (f(t^m), I[u^m])
};

struct EnergyLedger {
  std::vector<EnergyLedgerRow> rows;  // m = 2 .. N
  double e_first = 0.0;               // E^1
  double e_last = 0.0;                // E^N
  double residual = 0.0;              // E^N + sum(D+Z) - sum(W) - E^1
  double relative_residual = 0.0;     // |residual| / E^1
};

/// Discrete energy balance of a recorded constant-step history u^0 .. u^N.
/// All of D, Z and the balance come out of the states themselves; f must be
/// the forcing the run used (nullptr for unforced).
EnergyLedger energy_ledger(const SpectralNse& nse,
                           std::span<const SpectralField> states, double t0,
                           double dt, const Forcing* f);

// ---------------------------------------------------------------------------
// Constant-step runner used by the convergence / energy / overhead studies.

struct ConstantRunConfig {
  double dt = 0.01;
  double T = 0.5;
  Variant variant = Variant::Implicit;
  bool filtered = true;        // false: plain backward Euler
  bool record_states = false;  // keep u^0..u^N for the energy ledger
};

struct ConstantRunResult {
  bool ok = false;
  std::string error;
  SpectralField u_final;
  PressureField p_final_a;  // unfiltered pressure
  PressureField p_final_b;  // filtered pressure
  std::vector<SpectralField> states;
  double t0 = 0.0;
  RunStatistics stats;
};

using NseObserver = std::function<void(int step, double t, const SpectralField& u,
                                       const PressureField& pa,
                                       const PressureField& pb)>;

ConstantRunResult run_constant(const SpectralNse& nse, const SpectralField& u0,
                               double t0, const Forcing* f,
                               const ConstantRunConfig& cfg,
                               const NseObserver& observer = {});

/// Row-major grid snapshot (header n,t,i,j,x,y,u,v,p) for post-processing.
void write_snapshot_csv(const std::string& path, const SpectralNse& nse,
                        const SpectralField& u, const PressureField& p,
                        double t);

}  // namespace tfilt::spectral
