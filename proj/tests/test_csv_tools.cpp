#include <doctest.h>

#include <cstdlib>
#include <random>

#include "tfilt/csv.hpp"
#include "tfilt/experiments.hpp"

using namespace tfilt;

TEST_CASE("doubles survive a format/parse round trip bit exactly") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(mant(rng), expo(rng));
    const std::string s = csv::format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(std::strtod(csv::format_double(0.1).c_str(), nullptr) == 0.1);
}

TEST_CASE("table serialization basics") {
  csv::Table t;
  t.header = {"a", "b"};
  CHECK(csv::to_string(t) == "a,b\n");  // header-only for an empty run

  t.rows.push_back({1.5, std::string("x,y")});
  const std::string s = csv::to_string(t);
  CHECK(s == "a,b\n1.5,\"x,y\"\n");

  csv::Table bad;
  bad.header = {"a"};
  bad.rows.push_back({1.0, 2.0});
  CHECK_THROWS_AS(csv::to_string(bad), std::invalid_argument);
}

TEST_CASE("parse undoes quoting") {
  const auto rows = csv::parse("a,b\n\"x,\"\"y\",2\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "x,\"y");
  CHECK(rows[1][1] == "2");
}

TEST_CASE("emitted tables round trip through the parser bit exactly") {
  auto r = experiments::ode_converge("decay", {0.1, 0.05}, 1.0);
  const csv::Table t = experiments::to_table(r);
  const auto rows = csv::parse(csv::to_string(t));
  REQUIRE(rows.size() == t.rows.size() + 1);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.rows[i].size(); ++j)
      if (std::holds_alternative<double>(t.rows[i][j]))
        CHECK(std::strtod(rows[i + 1][j].c_str(), nullptr) ==
              std::get<double>(t.rows[i][j]));
}

TEST_CASE("experiments are deterministic: identical bytes on identical input") {
  auto a = experiments::ode_converge("decay", {0.1, 0.05, 0.025}, 1.0);
  auto b = experiments::ode_converge("decay", {0.1, 0.05, 0.025}, 1.0);
  CHECK(csv::to_string(experiments::to_table(a)) ==
        csv::to_string(experiments::to_table(b)));

  auto v1 = experiments::verify_all(2024, 200);
  auto v2 = experiments::verify_all(2024, 200);
  CHECK(csv::to_string(experiments::to_table(v1)) ==
        csv::to_string(experiments::to_table(v2)));

  auto e1 = experiments::nse_energy(16, 0.1, 0.01, 10, 1e-12, 7);
  auto e2 = experiments::nse_energy(16, 0.1, 0.01, 10, 1e-12, 7);
  CHECK(csv::to_string(experiments::to_table(e1)) ==
        csv::to_string(experiments::to_table(e2)));
}

TEST_CASE("verify experiment passes end to end") {
  auto v = experiments::verify_all(12345, 300);
  for (const auto& row : v.rows) {
    INFO(row.check, " = ", row.value, " (", row.relation, " ", row.threshold,
         ")");
    CHECK(row.pass);
  }
  CHECK(v.all_pass);
}

TEST_CASE("small adaptive NSE run emits consistent tables") {
  spectral::TwoPlateau profile{0.3, 2.7};
  auto r = experiments::adapt_run(16, 0.01, 1e-2, 3.0, 0.0, profile);
  REQUIRE(r.ok);
  const csv::Table traj = experiments::to_table(r);
  CHECK(traj.rows.size() == r.trajectory.points.size());
  const csv::Table att = experiments::attempts_table(r);
  CHECK(att.rows.size() == r.trajectory.attempts.size());
  CHECK(!experiments::windows_table(r).rows.empty());
}
