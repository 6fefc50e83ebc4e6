#include <doctest.h>

#include <cmath>
#include <random>

#include "tfilt/controller.hpp"

using namespace tfilt;

namespace {
ControllerConfig cfg_for(double tol) {
  ControllerConfig c;
  c.tol = tol;
  c.dt_min = 1e-14;
  c.dt_max = 10.0;
  return c;
}
}  // namespace

TEST_CASE("propose_dt worked values") {
  const auto cfg = cfg_for(1e-3);
  CHECK(propose_dt(0.1, 1e-3, 1e-3, 1, 0.9, cfg) ==
        doctest::Approx(0.09).epsilon(1e-15));
  CHECK(propose_dt(0.1, 4e-3, 1e-3, 1, 0.9, cfg) ==
        doctest::Approx(0.045).epsilon(1e-14));
  CHECK(propose_dt(0.1, 8e-3, 1e-3, 2, 0.9, cfg) ==
        doctest::Approx(0.045).epsilon(1e-14));
  // zero estimate maps straight to the growth clamp
  CHECK(propose_dt(0.1, 0.0, 1e-3, 1, 0.9, cfg) == doctest::Approx(0.5));
}

TEST_CASE("propose_dt is nonincreasing in the estimate") {
  const auto cfg = cfg_for(1e-4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const double e1 = u(rng) * 1e-2;
    const double e2 = e1 + u(rng) * 1e-2;
    for (int order : {1, 2}) {
      CHECK(propose_dt(0.1, e2, cfg.tol, order, 0.9, cfg) <=
            propose_dt(0.1, e1, cfg.tol, order, 0.9, cfg) + 1e-18);
    }
  }
}

TEST_CASE("decide: order-1 wins when only it passes") {
  const auto cfg = cfg_for(1e-3);
  ErrorEstimates est{0.5e-3, 2e-3};
  const auto d = decide(est, 0.1, cfg);
  CHECK(d.verdict == Verdict::Accept);
  CHECK(d.chosen_order == 1);
  CHECK(d.next_dt == doctest::Approx(0.09 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("decide: both fail, retry with the 0.7 proposals") {
  const auto cfg = cfg_for(1e-3);
  ErrorEstimates est{4e-3, 8e-3};
  const auto d = decide(est, 0.1, cfg);
  CHECK(d.verdict == Verdict::Reject);
  CHECK(d.next_dt == doctest::Approx(0.035).epsilon(1e-14));
  CHECK_FALSE(d.dt_underflow);
}

TEST_CASE("decide: exact problem grows at the ratio clamp, prefers order 2") {
  const auto cfg = cfg_for(1e-3);
  ErrorEstimates est{0.0, 0.0};
  const auto d = decide(est, 0.1, cfg);
  CHECK(d.verdict == Verdict::Accept);
  CHECK(d.chosen_order == 2);
  CHECK(d.next_dt == doctest::Approx(0.5));
}

TEST_CASE("decide: missing est2 accepts the filtered value under est1") {
  const auto cfg = cfg_for(1e-3);
  ErrorEstimates est;
  est.est1 = 2.5e-4;
  const auto d = decide(est, 0.1, cfg);
  CHECK(d.verdict == Verdict::Accept);
  CHECK(d.chosen_order == 2);
  CHECK(d.next_dt == doctest::Approx(0.09 * 2.0).epsilon(1e-14));
}

TEST_CASE("decide matches a brute-force transcription of the rules") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> loge(std::log(1e-8), std::log(1e-1));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto cfg = cfg_for(1e-4);
  for (int trial = 0; trial < 2000; ++trial) {
    const double dt = 0.01 + u01(rng);
    ErrorEstimates est;
    est.est1 = u01(rng) < 0.05 ? 0.0 : std::exp(loge(rng));
    if (u01(rng) < 0.8)
      est.est2 = u01(rng) < 0.05 ? 0.0 : std::exp(loge(rng));

    const auto d = decide(est, dt, cfg);

    const auto prop = [&](double e, int order, double safety) {
      return propose_dt(dt, e, cfg.tol, order, safety, cfg);
    };
    const bool p1 = est.est1 < cfg.tol;
    const bool p2 = est.est2.has_value() && *est.est2 < cfg.tol;
    if (!p1 && !p2) {
      CHECK(d.verdict == Verdict::Reject);
      double retry = prop(est.est1, 1, cfg.safety_reject);
      if (est.est2)
        retry = std::max(retry, prop(*est.est2, 2, cfg.safety_reject));
      CHECK(d.next_dt == doctest::Approx(retry).epsilon(1e-13));
    } else {
      CHECK(d.verdict == Verdict::Accept);
      if (!est.est2.has_value()) {
        CHECK(d.chosen_order == 2);
        CHECK(d.next_dt ==
              doctest::Approx(prop(est.est1, 1, cfg.safety_accept)));
      } else {
        const double dt1 = p1 ? prop(est.est1, 1, cfg.safety_accept) : 0.0;
        const double dt2 = p2 ? prop(*est.est2, 2, cfg.safety_accept) : 0.0;
        const int order = dt2 >= dt1 ? 2 : 1;
        CHECK(d.chosen_order == order);
        CHECK(d.next_dt == doctest::Approx(std::max(dt1, dt2)));
      }
    }
    // clamps always hold
    if (d.verdict == Verdict::Accept) {
      CHECK(d.next_dt >= std::max(cfg.dt_min, cfg.ratio_min * dt) - 1e-18);
      CHECK(d.next_dt <= std::min(cfg.dt_max, cfg.ratio_max * dt) + 1e-18);
    }
  }
}

TEST_CASE("tie at equal proposals prefers order 2") {
  const auto cfg = cfg_for(1e-3);
  // est1 = tol/4 gives 0.9 dt sqrt(4) = 1.8 dt; est2 = tol/8 gives the same.
  ErrorEstimates est{1e-3 / 4.0, 1e-3 / 8.0};
  const auto d = decide(est, 0.1, cfg);
  CHECK(d.verdict == Verdict::Accept);
  CHECK(d.chosen_order == 2);
}

TEST_CASE("config validation") {
  ControllerConfig c;
  c.tol = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.ratio_min = 2.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.safety_accept = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.dt_min = 1.0;
  c.dt_max = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
