// Command-line harness: runs the experiments and writes plot-ready CSV
// tables. Flags override values from an optional key=value config file; same
// config and seed produce byte-identical CSVs (the overhead command's timing
// columns are the one exception).
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "tfilt/experiments.hpp"
#include "tfilt/spectral/nse.hpp"

namespace {

std::vector<double> parse_list(const std::string& spec) {
  // "a,b,c" or "a..b" (repeatedly divide by 10, inclusive-ish of b).
  std::vector<double> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const double from = std::stod(spec.substr(0, dots));
    const double to = std::stod(spec.substr(dots + 2));
    if (!(from > 0.0) || !(to > 0.0) || to > from)
      throw CLI::ValidationError("range must go downward, e.g. 1e-1..1e-7");
    for (double v = from; v >= to * (1.0 - 1e-9); v /= 10.0) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos < spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    out.push_back(std::stod(spec.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (out.empty()) throw CLI::ValidationError("empty list");
  return out;
}

void note(const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-filtered backward Euler experiments"};
  app.require_subcommand(1);
  const auto with_config = [](CLI::App* sub) {
    sub->set_config("--config", "",
                    "key=value config file; flags take precedence");
    return sub;
  };

  // shared knobs
  std::string out = "out.csv";
  std::uint64_t seed = 12345;
  int n = 64;
  double nu = 1.0;
  double T = 0.5;
  int jobs = 1;

  auto* ode = with_config(app.add_subcommand("ode-converge",
                                 "scalar ODE temporal convergence table"));
  std::string ode_problem = "decay";
  std::string ode_dts = "0.1,0.05,0.025,0.0125";
  double ode_T = 1.0;
  ode->add_option("--problem", ode_problem, "decay | cubic | quadrature3");
  ode->add_option("--dts", ode_dts, "comma list of step sizes");
  ode->add_option("--T", ode_T, "final time");
  ode->add_option("--out", out, "output CSV");

  auto* nsec = with_config(app.add_subcommand("nse-converge",
                                  "Taylor-Green temporal convergence table"));
  std::string nse_dts = "0.05,0.025,0.0125,0.00625";
  nsec->add_option("--n", n, "modes per dimension (power of two)");
  nsec->add_option("--nu", nu, "kinematic viscosity");
  nsec->add_option("--T", T, "final time");
  nsec->add_option("--dts", nse_dts, "comma list of step sizes");
  nsec->add_option("--out", out, "output CSV");

  auto* energy = with_config(app.add_subcommand("nse-energy",
                                    "discrete energy balance ledger"));
  double en_dt = 0.005;
  int en_steps = 50;
  double en_tol = 1e-12;
  std::string snapshot;
  energy->add_option("--n", n, "modes per dimension");
  energy->add_option("--nu", nu, "kinematic viscosity");
  energy->add_option("--dt", en_dt, "constant step size");
  energy->add_option("--steps", en_steps, "number of steps");
  energy->add_option("--solver-tol", en_tol, "implicit solve tolerance");
  energy->add_option("--seed", seed, "seed for the initial field");
  energy->add_option("--out", out, "output CSV");
  energy->add_option("--snapshot", snapshot,
                     "also write a grid snapshot of the final forced state");

  auto* adapt = with_config(app.add_subcommand("adapt",
                                   "adaptive run on the transition problem"));
  double ad_tol = 1e-3;
  double ad_dt0 = 0.0;
  double ad_nu = 0.01;
  double ad_T = 3.0;
  double t_rise = 0.3, t_fall = 2.7;
  std::string ad_mode = "vsvo12";
  adapt->add_option("--n", n, "modes per dimension");
  adapt->add_option("--nu", ad_nu, "kinematic viscosity");
  adapt->add_option("--tol", ad_tol, "per-step error tolerance");
  adapt->add_option("--T", ad_T, "final time");
  adapt->add_option("--dt0", ad_dt0,
                    "initial step (0: (T-t0)*1e-4); the fixed step in "
                    "constant modes");
  adapt->add_option("--mode", ad_mode, "vsvo12 | constant1 | constant2")
      ->check(CLI::IsMember({"vsvo12", "constant1", "constant2"}));
  adapt->add_option("--t-rise", t_rise, "transition-up location");
  adapt->add_option("--t-fall", t_fall, "transition-down location");
  adapt->add_option("--out", out,
                    "trajectory CSV; attempts and windows tables are written "
                    "next to it");

  auto* wp = with_config(app.add_subcommand("work-precision",
                                "error vs steps for adaptive and constant runs"));
  std::string wp_tols = "1e-1..1e-7";
  std::string wp_dts = "0.03,0.01,0.003,0.001";
  double wp_nu = 0.01;
  double wp_T = 3.0;
  wp->add_option("--tols", wp_tols, "tolerances, list or 1e-1..1e-7");
  wp->add_option("--dts", wp_dts, "constant-run step sizes");
  wp->add_option("--n", n, "modes per dimension");
  wp->add_option("--nu", wp_nu, "kinematic viscosity");
  wp->add_option("--T", wp_T, "final time");
  wp->add_option("--t-rise", t_rise, "transition-up location");
  wp->add_option("--t-fall", t_fall, "transition-down location");
  wp->add_option("--jobs", jobs, "parallel cells");
  wp->add_option("--out", out, "output CSV");

  auto* ver = with_config(
      app.add_subcommand("verify", "algebraic and analytic checks"));
  int trials = 1000;
  ver->add_option("--seed", seed, "fuzz seed");
  ver->add_option("--trials", trials, "random trials per check");
  ver->add_option("--out", out, "output CSV");

  auto* ovh = with_config(app.add_subcommand("overhead",
                                 "filter cost relative to the implicit solve"));
  double ov_dt = 0.005;
  int ov_steps = 200;
  ovh->add_option("--n", n, "modes per dimension");
  ovh->add_option("--nu", nu, "kinematic viscosity");
  ovh->add_option("--dt", ov_dt, "constant step size");
  ovh->add_option("--steps", ov_steps, "number of steps");
  ovh->add_option("--seed", seed, "seed for the initial field");
  ovh->add_option("--out", out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  using namespace tfilt;
  try {
    if (ode->parsed()) {
      auto r = experiments::ode_converge(ode_problem, parse_list(ode_dts), ode_T);
      csv::write_file(out, experiments::to_table(r));
      note("[ode-converge] orders: be=" + std::to_string(r.order_be) +
           " filtered=" + std::to_string(r.order_filtered) +
           " double=" + std::to_string(r.order_double));
    } else if (nsec->parsed()) {
      auto r = experiments::nse_converge(n, nu, T, parse_list(nse_dts));
      csv::write_file(out, experiments::to_table(r));
      note("[nse-converge] orders: u_be=" + std::to_string(r.order_u_be) +
           " u_filtered=" + std::to_string(r.order_u_filtered) +
           " pA=" + std::to_string(r.order_p_a) +
           " pB=" + std::to_string(r.order_p_b));
    } else if (energy->parsed()) {
      auto r = experiments::nse_energy(n, nu, en_dt, en_steps, en_tol, seed);
      csv::write_file(out, experiments::to_table(r));
      note("[nse-energy] residuals: unforced=" +
           csv::format_double(r.unforced.relative_residual) +
           " forced=" + csv::format_double(r.forced.relative_residual));
      if (!snapshot.empty()) {
        spectral::SpectralNse nse({r.n, nu, en_tol, 50});
        spectral::write_snapshot_csv(snapshot, nse, r.final_state,
                                     r.final_pressure, r.t_final);
      }
    } else if (adapt->parsed()) {
      spectral::TwoPlateau profile{t_rise, t_fall};
      const Mode mode = ad_mode == "constant1"   ? Mode::ConstantOrder1
                        : ad_mode == "constant2" ? Mode::ConstantOrder2
                                                 : Mode::Vsvo12;
      auto r = experiments::adapt_run(n, ad_nu, ad_tol, ad_T, ad_dt0, profile,
                                      mode);
      csv::write_file(out, experiments::to_table(r));
      const std::string stem =
          out.size() > 4 && out.substr(out.size() - 4) == ".csv"
              ? out.substr(0, out.size() - 4)
              : out;
      csv::write_file(stem + "_attempts.csv", experiments::attempts_table(r));
      csv::write_file(stem + "_windows.csv", experiments::windows_table(r));
      note("[adapt] accepted=" + std::to_string(r.stats.accepted) +
           " rejected=" + std::to_string(r.stats.rejected) +
           " rejects_in_windows=" + std::to_string(r.rejects_in_windows) +
           " rel_err=" + csv::format_double(r.rel_l2l2_err));
      if (!r.ok) {
        note("[adapt] integration failed: " + r.error + " (partial CSV)");
        return 3;
      }
    } else if (wp->parsed()) {
      spectral::TwoPlateau profile{t_rise, t_fall};
      auto r = experiments::work_precision(parse_list(wp_tols),
                                           parse_list(wp_dts), n, wp_nu, wp_T,
                                           profile, jobs);
      csv::write_file(out, experiments::to_table(r));
      note(std::string("[work-precision] adaptive dominates at tight tols: ") +
           (r.adaptive_dominates_tight_tols ? "yes" : "no"));
    } else if (ver->parsed()) {
      auto r = experiments::verify_all(seed, trials);
      csv::write_file(out, experiments::to_table(r));
      for (const auto& row : r.rows)
        note(std::string(row.pass ? "[pass] " : "[FAIL] ") + row.check + " = " +
             csv::format_double(row.value) + " (" + row.relation + " " +
             csv::format_double(row.threshold) + ")");
      if (!r.all_pass) return 3;
    } else if (ovh->parsed()) {
      auto r = experiments::overhead(n, nu, ov_dt, ov_steps, seed);
      csv::write_file(out, experiments::to_table(r));
      note("[overhead] filter/solve ratio = " + csv::format_double(r.ratio));
    }
  } catch (const std::invalid_argument& e) {
    note(std::string("configuration error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    note(std::string("run failed: ") + e.what());
    return 3;
  }
  return 0;
}
