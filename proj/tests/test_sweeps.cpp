#include <cmath>

#include "doctest.h"
#include "dissipwave/sweeps.hpp"

using namespace dissipwave;

namespace {
const Geometry kPi = Geometry::with_width(std::numbers::pi);
}

TEST_CASE("uniform grid") {
  const auto g = uniform_s_grid(2.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == 0.0);
  CHECK(g[2] == 1.0);
  CHECK(g[4] == 2.0);
  CHECK_THROWS_AS(uniform_s_grid(1.0, 1), SolverError);
  CHECK_THROWS_AS(uniform_s_grid(0.0, 4), SolverError);
}

TEST_CASE("damped branch stays in its band below the axis") {
  const auto tr = trajectory(1, {1, 1}, kPi, 1.0, 41);
  CHECK(tr.front().lambda == cplx(kPi.nu));
  for (std::size_t k = 1; k < tr.size(); ++k) {
    CHECK(tr[k].lambda.real() > kPi.nu);
    CHECK(tr[k].lambda.real() < 2 * kPi.nu);
    CHECK(tr[k].lambda.imag() < 0.0);
    CHECK(std::abs(tr[k].lambda - tr[k - 1].lambda) < 0.5 * kPi.nu);
  }
}

TEST_CASE("balanced pairs keep the Neumann roots") {
  for (int n = 1; n <= 4; ++n) {
    for (const auto& p : trajectory(n, {1, -1}, kPi, 5.0, 26)) CHECK(p.lambda == cplx(n * kPi.nu));
  }
}

TEST_CASE("mixed-sign ground branch rises above the axis") {
  const auto tr = trajectory(0, {1, -0.5}, kPi, 2.0, 81);
  CHECK(tr.back().lambda.imag() > 0.0);
  CHECK(tr[4].lambda.imag() < 0.0);
}

TEST_CASE("overdamping scan") {
  CHECK_THROWS_AS(overdamping_scan({1, 1}, kPi, 3, 5.0, 51), SolverError);
  CHECK_THROWS_AS(overdamping_scan({-1, 0.5}, kPi, 3, 5.0, 51), SolverError);

  const auto r = overdamping_scan({1, -0.5}, kPi, 5, 8.0, 161);
  REQUIRE(r.crossings.size() == 6);
  for (int n = 0; n <= 5; ++n) {
    REQUIRE(r.crossings[n].has_value());
    const auto& c = *r.crossings[n];
    CHECK(std::abs(c.im_mu) < 1e-8);
    CHECK(c.bracket_hi - c.bracket_lo < 1e-8);
    // For l = pi the crossing is where lambda = n + 1/2 is real and
    // lambda^2 = -a_l a_0 = s^2 / 2.
    CHECK(c.s_star == doctest::Approx(std::sqrt(2.0) * (n + 0.5)).epsilon(1e-9));
  }
  const auto first = r.min_crossing();
  REQUIRE(first.has_value());
  CHECK(first->n == 0);
  for (const auto& g : r.gap_curve) {
    if (g.s > first->bracket_hi) CHECK(g.gap < 0.0);
    if (g.s > 0.0 && g.s < first->bracket_lo) CHECK(g.gap > 0.0);
  }

  const auto short_run = overdamping_scan({1, -0.5}, kPi, 3, 1.0, 21);
  CHECK(short_run.crossings[0].has_value());
  CHECK_FALSE(short_run.crossings[3].has_value());
}

TEST_CASE("gap curve") {
  const std::vector<double> small{0.0, 1e-4, 1e-3};
  const auto g = gap_curve({1, 1}, kPi, small, 8);
  CHECK(g[0].gap == 0.0);
  CHECK(g[1].gap / 1e-4 == doctest::Approx(2.0 / kPi.l).epsilon(1e-3));
  CHECK(g[2].gap / 1e-3 == doctest::Approx(2.0 / kPi.l).epsilon(1e-2));
  for (const auto& p : gap_curve({0, 0}, kPi, {0.0, 0.5, 1.0}, 5)) CHECK(p.gap == 0.0);
  CHECK_THROWS_AS(gap_curve({1, 1}, kPi, {0.5, 0.2}, 3), SolverError);
}

TEST_CASE("sign reversal flips every Im mu") {
  const auto a = figure_data({kPi, 6, {0.3, 0.1}, 1.0, 21});
  const auto b = figure_data({kPi, 6, {-0.3, -0.1}, 1.0, 21});
  for (std::size_t n = 0; n < a.branches.size(); ++n) {
    for (std::size_t k = 0; k < a.branches[n].size(); ++k) {
      CHECK(std::abs(a.branches[n][k].mu.imag() + b.branches[n][k].mu.imag()) < 1e-10);
    }
  }
}

TEST_CASE("figure data") {
  const FigureParams params;
  const auto r = figure_data(params);
  REQUIRE(r.branches.size() == 31);
  const double nu = params.geometry.nu;
  const double box = 10.0 * (1.0 + params.s_max * 1.5);
  for (std::size_t n = 0; n < r.branches.size(); ++n) {
    const auto& b = r.branches[n];
    CHECK(b.front().lambda == cplx(n * nu));
    for (std::size_t k = 1; k < b.size(); ++k) {
      CHECK(std::abs(b[k].lambda - b[k - 1].lambda) < 0.5 * nu);
      CHECK(std::abs(b[k].lambda.imag()) <= box);
      const double x = b[k].lambda.real() / nu;
      CHECK(std::abs(x - std::round(x)) > 0.0);
    }
    if (n >= 20) {
      const double s = b.back().s;
      const cplx approx = n * nu - kI * params.direction.sum() * s / (n * std::numbers::pi);
      CHECK(std::abs(b.back().lambda - approx) < 1.0 / (n * n));
    }
  }
}
