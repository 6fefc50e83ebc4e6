#pragma once

// The experiment drivers behind the CLI commands. Each returns plain rows so
// the CLI can serialize them and the test suites can assert on them without
// going through files.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tfilt/csv.hpp"
#include "tfilt/driver.hpp"
#include "tfilt/spectral/nse.hpp"
#include "tfilt/verify.hpp"

namespace tfilt::experiments {

// ------------------------------------------------------------- ode-converge
struct OdeConvergeRow {
  double dt;
  double err_be;
  double err_filtered;
  double err_double;
};

struct OdeConvergeResult {
  std::string problem;
  std::vector<OdeConvergeRow> rows;
  double order_be = 0.0;
  double order_filtered = 0.0;
  double order_double = 0.0;
  double seconds = 0.0;
};

/// Problems: "decay" (y' = -y), "cubic" (y' = -y^3), "quadrature3"
/// (y' = 3 cos 3t, solution sin 3t; its third derivative dominates).
OdeConvergeResult ode_converge(const std::string& problem_id,
                               std::vector<double> dts, double T);
csv::Table to_table(const OdeConvergeResult& r);

// ------------------------------------------------------------- nse-converge
struct NseConvergeRow {
  double dt;
  double err_u_be;
  double err_u_filtered;
  double err_p_a;
  double err_p_b;
};

struct NseConvergeResult {
  std::vector<NseConvergeRow> rows;
  double order_u_be = 0.0;
  double order_u_filtered = 0.0;
  double order_p_a = 0.0;
  double order_p_b = 0.0;
  bool a_no_worse_than_b = false;  // pressure error, at every dt
  double seconds = 0.0;
};

NseConvergeResult nse_converge(int n, double nu, double T,
                               std::vector<double> dts);
csv::Table to_table(const NseConvergeResult& r);

// --------------------------------------------------------------- nse-energy
struct NseEnergyResult {
  spectral::EnergyLedger unforced;
  spectral::EnergyLedger forced;
  int n = 0;
  double t_final = 0.0;
  spectral::SpectralField final_state;     // forced run
  spectral::PressureField final_pressure;  // recovered at the final state
  double seconds = 0.0;
};

NseEnergyResult nse_energy(int n, double nu, double dt, int steps,
                           double solver_tol, std::uint64_t seed);
csv::Table to_table(const NseEnergyResult& r);

// -------------------------------------------------------------------- adapt
struct AdaptResult {
  bool ok = false;
  std::string error;
  Trajectory trajectory;
  RunStatistics stats;
  double rel_l2l2_err = 0.0;
  std::vector<std::pair<double, double>> windows;  // transition intervals
  long rejects_total = 0;
  long rejects_in_windows = 0;
  double reject_window_fraction = 0.0;
  std::vector<std::array<double, 2>> norm_series;  // (t, ||u||) per accepted
  std::vector<double> err_series;                  // ||u - exact|| per accepted
  double seconds = 0.0;
};

/// mode Vsvo12 runs the adaptive method at `tol` with initial step dt0;
/// the constant modes ignore tol and use dt0 as the fixed step.
AdaptResult adapt_run(int n, double nu, double tol, double T, double dt0,
                      const spectral::TwoPlateau& profile,
                      Mode mode = Mode::Vsvo12);
csv::Table to_table(const AdaptResult& r);       // accepted trajectory
csv::Table attempts_table(const AdaptResult& r); // every attempt incl. rejects
csv::Table windows_table(const AdaptResult& r);

// ----------------------------------------------------------- work-precision
struct WorkPrecisionRow {
  std::string method;   // "vsvo12" or "constant2"
  double tol_or_dt;
  std::int64_t steps_taken;  // accepted + rejected
  std::int64_t accepted;
  std::int64_t rejected;
  double rel_err;
};

struct WorkPrecisionResult {
  std::vector<WorkPrecisionRow> rows;
  bool adaptive_dominates_tight_tols = false;  // tols <= 1e-4 beat the
                                               // constant curve at equal work
  double seconds = 0.0;
};

WorkPrecisionResult work_precision(std::vector<double> tols,
                                   std::vector<double> const_dts, int n,
                                   double nu, double T,
                                   const spectral::TwoPlateau& profile,
                                   int jobs = 1);
csv::Table to_table(const WorkPrecisionResult& r);

// ----------------------------------------------------------------- overhead
struct OverheadResult {
  double dt = 0.0;
  std::int64_t steps = 0;
  double be_solve_seconds = 0.0;
  double filter_seconds = 0.0;
  double ratio = 0.0;
  double seconds = 0.0;
};

OverheadResult overhead(int n, double nu, double dt, int steps,
                        std::uint64_t seed);
csv::Table to_table(const OverheadResult& r);

// ------------------------------------------------------------------- verify
struct VerifyRow {
  std::string check;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=" or ">="
  bool pass = false;
};

struct VerifyResult {
  std::vector<VerifyRow> rows;
  bool all_pass = false;
  double seconds = 0.0;
};

VerifyResult verify_all(std::uint64_t seed, int trials);
csv::Table to_table(const VerifyResult& r);

// ------------------------------------------------------------------ helpers
/// Scalar amplitude problem equivalent to the forced vortex: the single-mode
/// coefficient obeys a' = -2 nu a + (2 nu F + F').
Problem<double> amplitude_problem(double nu,
                                  std::function<double(double)> F,
                                  std::function<double(double)> Fp,
                                  SolverOptions opts = {});

/// Intervals where |F'| exceeds frac * max |F'|, padded and merged.
std::vector<std::pair<double, double>> transition_windows(
    const spectral::TwoPlateau& profile, double t0, double T,
    double frac = 1e-3, double pad = 0.02);

/// A-stability probe on y' = lambda y with lambda*dt = -1e6: runs the
/// constant-step filtered method and reports the G-energy monotonicity and
/// the asymptotic two-step root modulus (Hankel-quotient estimate).
struct StabilityProbeResult {
  bool energy_monotone = false;
  double root_estimate = 0.0;
  double root_error = 0.0;  // |estimate - sqrt(1/3)|
  int steps = 0;
};
StabilityProbeResult stability_probe(double lambda_dt, int steps);

}  // namespace tfilt::experiments
