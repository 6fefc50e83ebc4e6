#pragma once

// Step acceptance, order selection and step-size proposal.
//
// The controller is the classical elementary one: accept when any embedded
// estimate is below TOL, propose safety * dt * (TOL/EST)^(1/(order+1)), pick
// the order whose proposal is largest, retry with the 0.7 safety factor when
// both estimates fail. Clamps (ratio bounds, absolute dt bounds, reject
// budget) are the standard guards multistep codes add around that core.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "tfilt/estimators.hpp"

namespace tfilt {

struct ControllerConfig {
  double tol = 1e-3;
  double dt_min = 0.0;  // <= 0 means "derive from horizon" (1e-14 * (T - t0))
  double dt_max = 0.0;  // <= 0 means "derive from horizon" ((T - t0) / 2)
  double ratio_min = 0.1;
  double ratio_max = 5.0;
  int max_consecutive_rejects = 20;
  double safety_accept = 0.9;
  double safety_reject = 0.7;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("controller: tol must be > 0");
    if (dt_min > 0.0 && dt_max > 0.0 && !(dt_min < dt_max))
      throw std::invalid_argument("controller: dt_min must be < dt_max");
    if (!(ratio_min < 1.0 && 1.0 < ratio_max))
      throw std::invalid_argument("controller: need ratio_min < 1 < ratio_max");
    if (!(safety_accept > 0.0 && safety_accept <= 1.0) ||
        !(safety_reject > 0.0 && safety_reject <= 1.0))
      throw std::invalid_argument("controller: safety factors must be in (0,1]");
    if (max_consecutive_rejects < 1)
      throw std::invalid_argument("controller: max_consecutive_rejects < 1");
  }
};

enum class Verdict { Accept, Reject };

struct ControllerDecision {
  Verdict verdict = Verdict::Reject;
  int chosen_order = 0;   // 1 = backward Euler value, 2 = filtered value
  double next_dt = 0.0;   // accepted: next step; rejected: retry step
  bool dt_underflow = false;  // retry fell below dt_min
};

/// safety * dt * (tol/est)^(1/(order+1)), clamped to the ratio bounds around
/// dt and then to the absolute bounds. est = 0 maps straight to the
/// ratio_max clamp.
inline double propose_dt(double dt, double est, double tol, int order,
                         double safety, const ControllerConfig& cfg) {
  if (!(dt > 0.0) || !(tol > 0.0) || est < 0.0)
    throw std::invalid_argument("propose_dt: bad inputs");
  double next;
  if (est == 0.0) {
    next = cfg.ratio_max * dt;
  } else {
    next = safety * dt * std::pow(tol / est, 1.0 / (order + 1));
    next = std::clamp(next, cfg.ratio_min * dt, cfg.ratio_max * dt);
  }
  if (cfg.dt_min > 0.0) next = std::max(next, cfg.dt_min);
  if (cfg.dt_max > 0.0) next = std::min(next, cfg.dt_max);
  return next;
}

/// One controller decision from the embedded estimate norms. When est2 is
/// absent (startup window) the filtered value is still the one accepted, but
/// the step-size proposal runs off est1 with the order-1 exponent.
inline ControllerDecision decide(const ErrorEstimates& est, double dt,
                                 const ControllerConfig& cfg) {
  ControllerDecision d;
  const bool pass1 = est.est1 < cfg.tol;
  const bool pass2 = est.est2.has_value() && *est.est2 < cfg.tol;

  if (pass1 || pass2) {
    d.verdict = Verdict::Accept;
    if (!est.est2.has_value()) {
      d.chosen_order = 2;  // filtered value accepted under est1 control
      d.next_dt = propose_dt(dt, est.est1, cfg.tol, 1, cfg.safety_accept, cfg);
      return d;
    }
    const double dt1 =
        pass1 ? propose_dt(dt, est.est1, cfg.tol, 1, cfg.safety_accept, cfg) : 0.0;
    const double dt2 =
        pass2 ? propose_dt(dt, *est.est2, cfg.tol, 2, cfg.safety_accept, cfg) : 0.0;
    if (dt2 >= dt1) {  // ties prefer the higher order
      d.chosen_order = 2;
      d.next_dt = dt2;
    } else {
      d.chosen_order = 1;
      d.next_dt = dt1;
    }
    return d;
  }

  d.verdict = Verdict::Reject;
  // Ratio-clamped proposals, absolute bounds applied after the underflow
  // check so a genuine fall below dt_min is visible to the driver.
  const auto raw = [&](double e, int order) {
    if (e == 0.0) return cfg.ratio_max * dt;
    return std::clamp(
        cfg.safety_reject * dt * std::pow(cfg.tol / e, 1.0 / (order + 1)),
        cfg.ratio_min * dt, cfg.ratio_max * dt);
  };
  double retry = raw(est.est1, 1);
  if (est.est2.has_value()) retry = std::max(retry, raw(*est.est2, 2));
  if (cfg.dt_min > 0.0 && retry < cfg.dt_min) d.dt_underflow = true;
  if (cfg.dt_min > 0.0) retry = std::max(retry, cfg.dt_min);
  if (cfg.dt_max > 0.0) retry = std::min(retry, cfg.dt_max);
  d.next_dt = retry;
  return d;
}

}  // namespace tfilt
