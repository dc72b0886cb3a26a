#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "dissipwave/eigenbasis.hpp"
#include "dissipwave/spectrum_geometry.hpp"

using namespace dissipwave;

namespace {
const Geometry kPi = Geometry::with_width(std::numbers::pi);

// Dense sampling of the first `lines` half-lines, refined by the exact
// projection on the sampled segment containing the minimum.
double brute_force_distance(cplx z, const HalfLineSpectrum& spec, std::size_t lines) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < lines; ++n) {
    const cplx mu = spec.mu(n);
    const double reach = std::max(0.0, z.real() - mu.real()) + 2.0;
    const int samples = 2000;
    double local = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 0; k <= samples; ++k) {
      const double d = std::abs(z - (mu + reach * k / samples));
      if (d < local) local = d, arg = k;
    }
    const double r0 = reach * std::max(0, arg - 1) / samples;
    const double r1 = reach * std::min(samples, arg + 1) / samples;
    const double r = std::clamp(z.real() - mu.real(), r0, r1);
    best = std::min({best, local, std::abs(z - (mu + r))});
  }
  return best;
}
}  // namespace

TEST_CASE("halfline distance examples") {
  const cplx mu(2.0, -0.5);
  CHECK(halfline_distance(mu, mu) == 0.0);
  CHECK(halfline_distance(mu + 5.0, mu) == 0.0);
  CHECK(halfline_distance(mu + cplx(-3.0, 4.0), mu) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("Neumann spectrum is the nonnegative axis") {
  const HalfLineSpectrum s(solve_spectrum(10, {0, 0}, kPi));
  CHECK(spectrum_distance(-1.0, s).distance == doctest::Approx(1.0));
  CHECK(spectrum_distance(cplx(2.5, 0.0), s).distance == 0.0);
  CHECK(s.tail_imag == 0.0);
  const auto g = spectral_gap(s);
  CHECK(g.gap == 0.0);
  CHECK_FALSE(g.positive());
}

TEST_CASE("spectrum distance matches dense sampling of 200 half-lines") {
  const HalfLineSpectrum s(solve_spectrum(200, {1, 1}, kPi));
  CHECK(std::abs(spectrum_distance(cplx(0, 2), s).distance - brute_force_distance(cplx(0, 2), s, 200)) < 1e-10);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> re(-5.0, 60.0);
  std::uniform_real_distribution<double> im(-4.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const cplx z(re(rng), im(rng));
    const auto d = spectrum_distance(z, s);
    CHECK(std::abs(d.distance - brute_force_distance(z, s, 200)) < 1e-10);
    CHECK_FALSE(d.tail_extended);
  }
}

TEST_CASE("distance properties: min over lines and 1-Lipschitz") {
  const HalfLineSpectrum s(solve_spectrum(40, {1, 1}, kPi));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-5.0, 200.0);
  std::uniform_real_distribution<double> im(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const cplx z(re(rng), im(rng));
    const cplx w(re(rng), im(rng));
    const double dz = spectrum_distance(z, s).distance;
    for (std::size_t n = 0; n < s.table.size(); ++n) CHECK(dz <= halfline_distance(z, s.mu(n)) + 1e-15);
    CHECK(std::abs(dz - spectrum_distance(w, s).distance) <= std::abs(z - w) + 1e-12);
  }
}

TEST_CASE("tail extension beyond the table") {
  const HalfLineSpectrum s(solve_spectrum(4, {1, 1}, kPi));
  const auto d = spectrum_distance(cplx(400.0, 1.0), s);
  CHECK(d.tail_extended);
  double top = s.tail_imag;
  for (const auto& m : s.table.modes) top = std::max(top, m.mu.imag());
  CHECK(d.distance == doctest::Approx(1.0 - top).epsilon(1e-12));
  const auto far = spectrum_distance(cplx(1e4, 0.0), s);
  CHECK(far.tail_extended);
  CHECK(far.distance == doctest::Approx(-top).epsilon(1e-12));
  CHECK_THROWS_AS(spectrum_distance(cplx(NAN, 0.0), s), SolverError);
}

TEST_CASE("tail consistency and depth") {
  const HalfLineSpectrum s(solve_spectrum(64, {1, 1}, kPi));
  CHECK(s.tail_imag == doctest::Approx(-4.0 / std::numbers::pi));
  for (std::size_t n = 1; n < s.table.size(); ++n) {
    CHECK(n * std::abs(s.table[n].mu.imag() - s.tail_imag) < 10.0);
  }
  CHECK(s.deep_enough());
  CHECK(std::abs(s.table.modes.back().mu.imag() - s.tail_imag) < 10.0 / 64);
}

TEST_CASE("spectral gap examples") {
  for (double l : {std::numbers::pi, 2.0}) {
    const auto g = Geometry::with_width(l);
    const double eps = 1e-3;
    const auto rep = spectral_gap(HalfLineSpectrum(solve_spectrum(64, {eps, eps}, g)));
    CHECK(rep.attaining_index.has_value());
    CHECK(*rep.attaining_index == 0);
    CHECK(rep.gap * l / (2 * eps) == doctest::Approx(1.0).epsilon(0.01));
  }
  const auto over = spectral_gap(HalfLineSpectrum(solve_spectrum(30, RobinPair{1, -0.5}.scaled(6.0), kPi)));
  CHECK(over.gap < 0.0);
  CHECK_THROWS_AS(HalfLineSpectrum(SpectrumTable{kPi, {1, 1}, {}}), SolverError);
}

TEST_CASE("strip above -gap is free of spectrum") {
  const HalfLineSpectrum s(solve_spectrum(64, {0.1, 0.05}, kPi));
  const auto g = spectral_gap(s);
  REQUIRE(g.positive());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> re(-10.0, 3000.0);
  std::uniform_real_distribution<double> im(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const cplx z(re(rng), -g.gap * (1.0 - 1e-3) + im(rng));
    CHECK(spectrum_distance(z, s).distance > 0.0);
  }
}

TEST_CASE("resolvent bound map") {
  const HalfLineSpectrum s(solve_spectrum(10, {0, 0}, kPi));
  GridRegion r{-2.0, 0.0, -1.0, 1.0, 3, 3};
  const auto m = resolvent_bound_map(r, s, 1.0);
  REQUIRE(m.size() == 9);
  // Row-major with Re fastest: index 1*3 + 1 is z = -1.
  CHECK(r.point(1, 1) == cplx(-1.0, 0.0));
  CHECK(m[4] == doctest::Approx(1.0));
  CHECK(std::isinf(m[5]));  // z = 0 lies on the spectrum
  const auto m3 = resolvent_bound_map(r, s, 3.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (std::isfinite(m[i])) CHECK(m3[i] == doctest::Approx(3.0 * m[i]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(resolvent_bound_map(r, s, 0.5), SolverError);
  GridRegion bad{1.0, 0.0, 0.0, 1.0, 2, 2};
  CHECK_THROWS_AS(resolvent_bound_map(bad, s, 1.0), SolverError);

  const HalfLineSpectrum d(solve_spectrum(64, {1, 1}, kPi));
  const double gap = spectral_gap(d).gap;
  GridRegion strip{-5.0, 50.0, -gap / 2, 2.0, 56, 12};
  const auto ms = resolvent_bound_map(strip, d, gram_report(d.table, 32).riesz_condition);
  for (double v : ms) CHECK(std::isfinite(v));
}
