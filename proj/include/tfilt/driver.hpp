#pragma once

// The integration loop: history management, startup, step attempt assembly,
// controller dispatch, trajectory and statistics recording.
//
// Modes:
//   Vsvo12               adaptive order 1/2 with embedded estimates
//   ConstantOrder1       plain backward Euler at fixed dt
//   ConstantOrder2       backward Euler + time filter at fixed dt
//   ConstantDoubleFilter backward Euler + both filters at fixed dt
//
// The first adaptive step is bootstrapped by plain BE under step-doubling
// error control (one full step against two half steps); the filtered path
// opens as soon as two back states exist and the second estimator once three
// do. Every attempt, including rejections, lands in a side channel so
// work-precision accounting can count real work.

#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tfilt/controller.hpp"
#include "tfilt/estimators.hpp"
#include "tfilt/filters.hpp"
#include "tfilt/stepper.hpp"

namespace tfilt {

enum class Mode { Vsvo12, ConstantOrder1, ConstantOrder2, ConstantDoubleFilter };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Vsvo12: return "vsvo12";
    case Mode::ConstantOrder1: return "constant1";
    case Mode::ConstantOrder2: return "constant2";
    case Mode::ConstantDoubleFilter: return "constant2x";
  }
  return "?";
}

/// Ring of the most recent accepted states. Ratios are always recomputed
/// from the stored times.
template <class S>
class HistoryWindow {
 public:
  static constexpr std::size_t capacity = 4;

  void push(double t, S y) {
    if (!times_.empty() && !(t > times_.back()))
      throw std::invalid_argument("history: times must increase");
    times_.push_back(t);
    states_.push_back(std::move(y));
    if (times_.size() > capacity) {
      times_.pop_front();
      states_.pop_front();
    }
  }
  std::size_t size() const noexcept { return times_.size(); }
  /// k = 0 is the newest entry.
  double time(std::size_t k) const { return times_[times_.size() - 1 - k]; }
  const S& state(std::size_t k) const { return states_[states_.size() - 1 - k]; }

  /// Ratio of an attempted step dt to the last accepted step.
  double r_cur(double dt_attempt) const {
    return dt_attempt / (time(0) - time(1));
  }
  double r_prev() const { return (time(0) - time(1)) / (time(1) - time(2)); }

 private:
  std::deque<double> times_;
  std::deque<S> states_;
};

struct TrajectoryPoint {
  double t = 0.0;
  double dt = 0.0;    // size of the step that produced this state
  int order = 0;      // 0 for the initial state
  double est1 = std::numeric_limits<double>::quiet_NaN();
  double est2 = std::numeric_limits<double>::quiet_NaN();
};

struct AttemptRecord {
  double t_start = 0.0;
  double dt = 0.0;
  double est1 = std::numeric_limits<double>::quiet_NaN();
  double est2 = std::numeric_limits<double>::quiet_NaN();
  bool accepted = false;
  int order = 0;
  bool solver_failed = false;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;    // accepted states (incl. t0 row)
  std::vector<AttemptRecord> attempts;    // every attempt, rejects included
};

struct RunStatistics {
  long accepted = 0;
  long rejected = 0;
  long accepted_order1 = 0;
  long accepted_order2 = 0;
  long solver_iterations = 0;
  double wall_seconds = 0.0;
  double be_solve_seconds = 0.0;
  double filter_seconds = 0.0;

  long attempts() const { return accepted + rejected; }
};

template <class S>
struct IntegrationResult {
  Trajectory trajectory;
  RunStatistics stats;
  S y_final;
  bool ok = false;
  std::string error;
};

template <class S>
using StepObserver = std::function<void(const TrajectoryPoint&, const S&)>;

struct IntegrateOptions {
  Mode mode = Mode::Vsvo12;
  double dt_init = 0.0;  // <= 0: (T - t0) * 1e-4; constant modes: the fixed dt
  ControllerConfig controller{};
  bool linearly_implicit = false;  // extrapolated linearization point for BE
};

namespace detail {

class ScopedTimer {
 public:
  explicit ScopedTimer(double& acc)
      : acc_(acc), t0_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    acc_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
                .count();
  }

 private:
  double& acc_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

template <class S>
IntegrationResult<S> integrate(const Problem<S>& problem, const S& y0,
                               double t0, double T, IntegrateOptions opt,
                               const StepObserver<S>& observer = {}) {
  if (!(T > t0)) throw std::invalid_argument("integrate: need T > t0");
  const double span = T - t0;
  ControllerConfig cfg = opt.controller;
  if (cfg.dt_min <= 0.0) cfg.dt_min = 1e-14 * span;
  if (cfg.dt_max <= 0.0) cfg.dt_max = 0.5 * span;
  cfg.validate();

  IntegrationResult<S> res{Trajectory{}, RunStatistics{}, y0, false, {}};
  detail::ScopedTimer total(res.stats.wall_seconds);

  HistoryWindow<S> hist;
  hist.push(t0, y0);
  TrajectoryPoint p0;
  p0.t = t0;
  res.trajectory.points.push_back(p0);
  if (observer) observer(p0, y0);

  const auto fail = [&](std::string why) {
    res.ok = false;
    res.error = std::move(why);
    res.y_final = hist.state(0);
    return res;
  };

  const bool constant_mode = opt.mode != Mode::Vsvo12;
  double dt =
      opt.dt_init > 0.0 ? opt.dt_init : std::clamp(1e-4 * span, cfg.dt_min, cfg.dt_max);
  double t = t0;
  int consecutive_rejects = 0;

  const auto accept_state = [&](double t_new, double dt_used, int order, S y,
                                double e1, double e2) {
    TrajectoryPoint tp;
    tp.t = t_new;
    tp.dt = dt_used;
    tp.order = order;
    tp.est1 = e1;
    tp.est2 = e2;
    res.trajectory.points.push_back(tp);
    res.trajectory.attempts.push_back(
        {t, dt_used, e1, e2, true, order, false});
    res.stats.accepted += 1;
    if (order == 1)
      res.stats.accepted_order1 += 1;
    else
      res.stats.accepted_order2 += 1;
    hist.push(t_new, std::move(y));
    if (observer) observer(tp, hist.state(0));
    t = t_new;
    consecutive_rejects = 0;
  };

  // ---------------------------------------------------------------- constant
  if (constant_mode) {
    if (!(opt.dt_init > 0.0))
      throw std::invalid_argument("integrate: constant modes need dt_init");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    while (t < T) {
      const double remaining = T - t;
      const bool landing = remaining <= dt * (1.0 + 1e-12) ||
                           remaining - dt < cfg.dt_min;
      const double dt_step = landing ? remaining : dt;
      const double t_new = landing ? T : t + dt_step;

      // The two-step filtered modes need a second-order starting value;
      // Richardson extrapolation of one full against two half BE steps
      // supplies it without touching anything beyond plain BE solves.
      if (opt.mode != Mode::ConstantOrder1 && hist.size() < 2) {
        StepResult<S> full, h1, h2;
        {
          detail::ScopedTimer bt(res.stats.be_solve_seconds);
          full = be_step(problem, t, hist.state(0), dt_step);
          h1 = be_step(problem, t, hist.state(0), 0.5 * dt_step);
          h2 = be_step(problem, t + 0.5 * dt_step, h1.y, 0.5 * dt_step);
        }
        res.stats.solver_iterations += full.report.iterations +
                                       h1.report.iterations +
                                       h2.report.iterations;
        if (!full.report.converged || !h1.report.converged ||
            !h2.report.converged)
          return fail("solver failed to converge in constant-mode startup");
        const S diff = linear_combine<S>({1.0, -1.0}, {&full.y, &h2.y});
        const double est = norm(diff);
        S y1 = linear_combine<S>({2.0, -1.0}, {&h2.y, &full.y});
        accept_state(t_new, dt_step, 1, std::move(y1), est, nan);
        continue;
      }

      StepResult<S> be;
      {
        detail::ScopedTimer bt(res.stats.be_solve_seconds);
        const S* lin_ptr = nullptr;
        S lin;
        if (opt.linearly_implicit && hist.size() >= 2) {
          lin = linearization_point(hist.state(0), hist.state(1),
                                    hist.r_cur(dt_step));
          lin_ptr = &lin;
        }
        be = be_step(problem, t, hist.state(0), dt_step, lin_ptr);
      }
      res.stats.solver_iterations += be.report.iterations;
      if (!be.report.converged)
        return fail("solver failed to converge in constant mode at t=" +
                    std::to_string(t));

      if (opt.mode == Mode::ConstantOrder1) {
        accept_state(t_new, dt_step, 1, std::move(be.y), nan, nan);
        continue;
      }

      detail::ScopedTimer ft(res.stats.filter_seconds);
      const double r_cur = hist.r_cur(dt_step);
      S y2 = filter_order2(be.y, hist.state(0), hist.state(1), r_cur);
      const double e1 = norm(est1(be.y, y2));
      if (opt.mode == Mode::ConstantDoubleFilter && hist.size() >= 3) {
        S e2v = est2(y2, hist.state(0), hist.state(1), hist.state(2), r_cur,
                     hist.r_prev());
        const double e2 = norm(e2v);
        S y3 = linear_combine<S>({1.0, -1.0}, {&y2, &e2v});
        accept_state(t_new, dt_step, 2, std::move(y3), e1, e2);
      } else {
        accept_state(t_new, dt_step, 2, std::move(y2), e1, nan);
      }
    }
    res.ok = true;
    res.y_final = hist.state(0);
    return res;
  }

  // ------------------------------------------------------------------ vsvo12
  // Startup: plain BE under step-doubling control produces the first state.
  while (hist.size() < 2) {
    const double dt_step = std::min(dt, T - t);
    StepResult<S> full, h1, h2;
    {
      detail::ScopedTimer bt(res.stats.be_solve_seconds);
      full = be_step(problem, t, hist.state(0), dt_step);
      h1 = be_step(problem, t, hist.state(0), 0.5 * dt_step);
      h2 = be_step(problem, t + 0.5 * dt_step, h1.y, 0.5 * dt_step);
    }
    res.stats.solver_iterations +=
        full.report.iterations + h1.report.iterations + h2.report.iterations;
    if (!full.report.converged || !h1.report.converged || !h2.report.converged) {
      res.trajectory.attempts.push_back(
          {t, dt_step, std::numeric_limits<double>::quiet_NaN(),
           std::numeric_limits<double>::quiet_NaN(), false, 0, true});
      res.stats.rejected += 1;
      consecutive_rejects += 1;
      dt = 0.5 * dt_step;
      if (dt < cfg.dt_min) return fail("startup: dt underflow");
      if (consecutive_rejects > cfg.max_consecutive_rejects)
        return fail("startup: too many consecutive rejections");
      continue;
    }
    const S diff = linear_combine<S>({1.0, -1.0}, {&full.y, &h2.y});
    const double est = norm(diff);
    if (est < cfg.tol) {
      const double t_new = (dt_step >= T - t) ? T : t + dt_step;
      accept_state(t_new, dt_step, 1, std::move(full.y), est,
                   std::numeric_limits<double>::quiet_NaN());
      dt = propose_dt(dt_step, est, cfg.tol, 1, cfg.safety_accept, cfg);
    } else {
      res.trajectory.attempts.push_back(
          {t, dt_step, est, std::numeric_limits<double>::quiet_NaN(), false, 0,
           false});
      res.stats.rejected += 1;
      consecutive_rejects += 1;
      const double retry =
          cfg.safety_reject * dt_step * std::sqrt(cfg.tol / est);
      if (retry < cfg.dt_min) return fail("startup: dt underflow");
      dt = std::clamp(retry, cfg.ratio_min * dt_step, cfg.ratio_max * dt_step);
      if (consecutive_rejects > cfg.max_consecutive_rejects)
        return fail("startup: too many consecutive rejections");
    }
  }

  while (t < T) {
    const double remaining = T - t;
    const bool landing =
        remaining <= dt * (1.0 + 1e-12) || remaining - dt < cfg.dt_min;
    const double dt_step = landing ? remaining : dt;
    const double t_new = landing ? T : t + dt_step;

    StepResult<S> be;
    {
      detail::ScopedTimer bt(res.stats.be_solve_seconds);
      const S* lin_ptr = nullptr;
      S lin;
      if (opt.linearly_implicit) {
        lin = linearization_point(hist.state(0), hist.state(1),
                                  hist.r_cur(dt_step));
        lin_ptr = &lin;
      }
      be = be_step(problem, t, hist.state(0), dt_step, lin_ptr);
    }
    res.stats.solver_iterations += be.report.iterations;
    if (!be.report.converged) {
      res.trajectory.attempts.push_back(
          {t, dt_step, std::numeric_limits<double>::quiet_NaN(),
           std::numeric_limits<double>::quiet_NaN(), false, 0, true});
      res.stats.rejected += 1;
      consecutive_rejects += 1;
      if (consecutive_rejects > cfg.max_consecutive_rejects)
        return fail("too many consecutive rejections (solver)");
      dt = 0.5 * dt_step;
      if (dt < cfg.dt_min) return fail("dt underflow after solver failure");
      continue;
    }

    ErrorEstimates est;
    S y2;
    {
      detail::ScopedTimer ft(res.stats.filter_seconds);
      const double r_cur = hist.r_cur(dt_step);
      y2 = filter_order2(be.y, hist.state(0), hist.state(1), r_cur);
      est.est1 = norm(est1(be.y, y2));
      if (hist.size() >= 3) {
        est.est2 = norm(est2(y2, hist.state(0), hist.state(1), hist.state(2),
                             r_cur, hist.r_prev()));
      }
    }

    const ControllerDecision d = decide(est, dt_step, cfg);
    const double e2rec = est.est2.value_or(std::numeric_limits<double>::quiet_NaN());
    if (d.verdict == Verdict::Accept) {
      S y_acc = d.chosen_order == 1 ? std::move(be.y) : std::move(y2);
      accept_state(t_new, dt_step, d.chosen_order, std::move(y_acc), est.est1,
                   e2rec);
      dt = d.next_dt;
    } else {
      res.trajectory.attempts.push_back(
          {t, dt_step, est.est1, e2rec, false, 0, false});
      res.stats.rejected += 1;
      consecutive_rejects += 1;
      if (d.dt_underflow) return fail("dt underflow");
      if (consecutive_rejects > cfg.max_consecutive_rejects)
        return fail("too many consecutive rejections");
      dt = d.next_dt;
    }
  }

  res.ok = true;
  res.y_final = hist.state(0);
  return res;
}

/// Replays a prescribed (dt, order) schedule with no controller; used to
/// check that integrations are pure functions of their inputs.
template <class S>
IntegrationResult<S> integrate_prescribed(
    const Problem<S>& problem, const S& y0, double t0,
    std::span<const std::pair<double, int>> schedule, bool linearly_implicit,
    const StepObserver<S>& observer = {}) {
  IntegrationResult<S> res{Trajectory{}, RunStatistics{}, y0, false, {}};
  HistoryWindow<S> hist;
  hist.push(t0, y0);
  TrajectoryPoint p0;
  p0.t = t0;
  res.trajectory.points.push_back(p0);
  if (observer) observer(p0, y0);
  double t = t0;
  for (const auto& [dt_step, order] : schedule) {
    const S* lin_ptr = nullptr;
    S lin;
    if (linearly_implicit && hist.size() >= 2) {
      lin = linearization_point(hist.state(0), hist.state(1), hist.r_cur(dt_step));
      lin_ptr = &lin;
    }
    StepResult<S> be = be_step(problem, t, hist.state(0), dt_step, lin_ptr);
    res.stats.solver_iterations += be.report.iterations;
    if (!be.report.converged) {
      res.error = "replay: solver failure";
      res.y_final = hist.state(0);
      return res;
    }
    S y_acc = be.y;
    if (order == 2) {
      y_acc = filter_order2(be.y, hist.state(0), hist.state(1),
                            hist.r_cur(dt_step));
    }
    t += dt_step;
    TrajectoryPoint tp;
    tp.t = t;
    tp.dt = dt_step;
    tp.order = order;
    res.trajectory.points.push_back(tp);
    res.stats.accepted += 1;
    hist.push(t, std::move(y_acc));
    if (observer) observer(tp, hist.state(0));
  }
  res.ok = true;
  res.y_final = hist.state(0);
  return res;
}

}  // namespace tfilt
