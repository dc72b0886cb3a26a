#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "dissipwave/evolution.hpp"
#include "dissipwave/spectrum_geometry.hpp"

using namespace dissipwave;

namespace {
const Geometry kPi = Geometry::with_width(std::numbers::pi);

const SpectrumTable& table11() {
  static const SpectrumTable t = solve_spectrum(64, {1, 1}, kPi);
  return t;
}

std::vector<cplx> sample_mode(const EigenfunctionForm& f, const std::vector<double>& y) {
  std::vector<cplx> v(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) v[i] = eigenfunction_eval(f, y[i]);
  return v;
}
}  // namespace

TEST_CASE("plan validation and grids") {
  const auto& t = table11();
  CHECK_THROWS_AS(EvolutionPlan::build(t, 10.0, 100, 4), SolverError);
  CHECK_THROWS_AS(EvolutionPlan::build(t, 10.0, 8, 4), SolverError);
  CHECK_THROWS_AS(EvolutionPlan::build(t, -1.0, 64, 4), SolverError);
  CHECK_THROWS_AS(EvolutionPlan::build(t, 10.0, 64, 100), SolverError);
  const auto p = EvolutionPlan::build(t, 10.0, 64, 4);
  CHECK(p.dx() == doctest::Approx(20.0 / 64));
  CHECK(p.x_nodes().front() == -10.0);
  const auto xi = p.frequencies();
  CHECK(xi[1] == doctest::Approx(std::numbers::pi / 10.0));
  CHECK(xi[63] == doctest::Approx(-std::numbers::pi / 10.0));
}

TEST_CASE("initial decomposition") {
  const auto p = EvolutionPlan::build(table11(), 20.0, 128, 48);
  const auto f = gaussian_profile(p, 1.0, 2.0, 0.5);
  WaveState w{0.0, Eigen::MatrixXcd(p.n_x, static_cast<Eigen::Index>(p.y_grid.nodes.size()))};
  for (Eigen::Index q = 0; q < w.values.cols(); ++q) {
    const cplx phi = p.phi_on_y(q, 3);
    for (int j = 0; j < p.n_x; ++j) w.values(j, q) = f[static_cast<std::size_t>(j)] * phi;
  }
  const auto d = initial_decompose(p, w);
  for (int n = 0; n < p.n_modes; ++n) {
    for (int j = 0; j < p.n_x; ++j) {
      const cplx expect = n == 3 ? f[static_cast<std::size_t>(j)] : cplx{};
      CHECK(std::abs(d.state.coeffs(n, j) - expect) < 1e-10);
    }
  }
  WaveState zero{0.0, Eigen::MatrixXcd::Zero(w.values.rows(), w.values.cols())};
  CHECK(initial_decompose(p, zero).state.coeffs.norm() == 0.0);

  const auto g = gaussian_wave(p, 0.0, 1.5, 0.0, kPi.l / 2, 0.3);
  const auto dg = initial_decompose(p, g);
  CHECK(dg.defect < 1e-6);
  CHECK(std::abs(state_norm(p, dg.state) - grid_norm(p, g)) < 1e-8);

  const auto p8 = EvolutionPlan::build(table11(), 20.0, 128, 8);
  const auto r8 = gaussian_wave(p8, 0.0, 1.5, 0.0, 0.5, 0.4);
  CHECK_THROWS_AS(initial_decompose(p8, r8), SolverError);
}

TEST_CASE("propagation: identity, semigroup, exact modal decay") {
  const auto p = EvolutionPlan::build(table11(), 20.0, 128, 8);
  const auto u0 = random_state(p, 6, 17);
  const auto same = propagate(p, u0, 0.0);
  CHECK((same.coeffs - u0.coeffs).norm() == 0.0);
  const auto a = propagate(p, propagate(p, u0, 0.7), 1.9);
  const auto b = propagate(p, u0, 1.9);
  CHECK((a.coeffs - b.coeffs).norm() <= 1e-12 * b.coeffs.norm());
  CHECK_THROWS_AS(propagate(p, b, 1.0), SolverError);

  for (int n : {0, 2, 5}) {
    const auto s0 = mode_pure_state(p, n, gaussian_profile(p, 0.0, 1.0, 1.0));
    const double n0 = state_norm(p, s0);
    for (double t : {1.0, 5.0, 10.0}) {
      const double ratio = state_norm(p, propagate(p, s0, t)) / n0;
      CHECK(std::abs(ratio / std::exp(t * p.table[n].mu.imag()) - 1.0) < 1e-10);
    }
  }

  // A plane wave on the box grid: modulus per node scales exactly.
  std::vector<cplx> wave(static_cast<std::size_t>(p.n_x));
  const auto x = p.x_nodes();
  const double xi0 = p.frequencies()[3];
  for (std::size_t j = 0; j < wave.size(); ++j) wave[j] = std::exp(kI * xi0 * x[j]);
  const auto pw = propagate(p, mode_pure_state(p, 1, wave), 2.0);
  for (int j = 0; j < p.n_x; ++j) {
    CHECK(std::abs(std::abs(pw.coeffs(1, j)) - std::exp(2.0 * p.table[1].mu.imag())) < 1e-12);
  }
}

TEST_CASE("state norm against synthesis and quadrature") {
  const auto pn = EvolutionPlan::build(solve_spectrum(8, {0, 0}, kPi), 10.0, 64, 6);
  const auto s = random_state(pn, 6, 1);
  double sum = 0.0;
  for (int n = 0; n < 6; ++n) sum += s.coeffs.row(n).squaredNorm() * pn.dx();
  CHECK(state_norm(pn, s) == doctest::Approx(std::sqrt(sum)).epsilon(1e-13));

  const auto p = EvolutionPlan::build(table11(), 20.0, 128, 8);
  const auto r = random_state(p, 8, 99);
  CHECK(std::abs(state_norm(p, r) - grid_norm(p, synthesize(p, r))) < 1e-8 * state_norm(p, r));
  const auto single = mode_pure_state(p, 4, gaussian_profile(p, 0.0, 1.0, 0.0));
  CHECK(state_norm(p, single) == doctest::Approx(std::sqrt(single.coeffs.row(4).squaredNorm() * p.dx())));
  CHECK(edge_mass_fraction(p, single) < 1e-6);
}

TEST_CASE("norm is nonincreasing for nonnegative pairs") {
  const auto p = EvolutionPlan::build(table11(), 20.0, 128, 8);
  const auto u0 = random_state(p, 8, 4);
  double prev = state_norm(p, u0);
  for (int k = 1; k <= 40; ++k) {
    const double cur = state_norm(p, propagate(p, u0, 0.25 * k));
    CHECK(cur <= prev + 1e-10);
    prev = cur;
  }
}

TEST_CASE("decay fit") {
  std::vector<double> t;
  std::vector<double> y;
  for (int k = 0; k < 20; ++k) {
    t.push_back(0.5 * k);
    y.push_back(std::exp(-0.3 * 0.5 * k));
  }
  const auto f = decay_fit(t, y, 0.0, 10.0);
  CHECK(f.rate == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  CHECK_THROWS_AS(decay_fit(t, y, 0.0, 2.0), SolverError);
  y[5] = 0.0;
  try {
    decay_fit(t, y, 0.0, 10.0);
    FAIL("expected NonPositiveNorm");
  } catch (const SolverError& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveNorm);
  }

  const auto p = EvolutionPlan::build(table11(), 20.0, 64, 4);
  const auto s0 = mode_pure_state(p, 2, gaussian_profile(p, 0.0, 1.0, 0.0));
  std::vector<double> ts;
  std::vector<double> ns;
  for (int k = 0; k <= 20; ++k) {
    ts.push_back(0.25 * k);
    ns.push_back(state_norm(p, propagate(p, s0, 0.25 * k)));
  }
  CHECK(std::abs(decay_fit(ts, ns, 0.0, 5.0).rate + p.table[2].mu.imag()) < 1e-8);
}

TEST_CASE("Crank-Nicolson oracle") {
  CHECK_THROWS_AS((CNConfig{16, 0.1, 5}).validate(), SolverError);
  CHECK_THROWS_AS((CNConfig{64, 0.0, 5}).validate(), SolverError);

  const auto y = fd_nodes(kPi, 64);
  std::vector<cplx> c(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) c[i] = std::cos(y[i]);
  const auto tr = cn_evolve(c, {0, 0}, kPi, {64, 0.01, 200});
  for (std::size_t k = 0; k < tr.states.size(); ++k) CHECK(std::abs(tr.norm(k) - tr.norm(0)) < 1e-10);
  CHECK(energy_identity_residual(tr, {0, 0}) < 1e-10);
  CHECK_THROWS_AS(cn_evolve(std::vector<cplx>(10), {0, 0}, kPi, {64, 0.01, 1}), SolverError);

  // Strictly decreasing with absorption, growing in the anti-dissipative case.
  const auto d = cn_evolve(c, {1, 1}, kPi, {64, 0.01, 100});
  for (std::size_t k = 1; k < d.states.size(); ++k) CHECK(d.norm(k) < d.norm(k - 1));
  const auto g = cn_evolve(c, {-0.2, 0.1}, kPi, {64, 0.01, 100});
  CHECK(g.norm(100) > g.norm(0));
}

TEST_CASE("Crank-Nicolson rate and energy identity converge at second order") {
  const auto& t = table11();
  for (RobinPair rb : {RobinPair{1, 1}, RobinPair{1, 0}}) {
    const auto tt = rb.a_0 == 0.0 ? solve_spectrum(2, rb, kPi) : t;
    const auto ff = eigenfunctions(tt, 3);
    double prev_rate = 0.0;
    double prev_energy = 0.0;
    for (int lev = 0; lev < 3; ++lev) {
      const int ny = 64 << lev;
      const double dt = 0.01 / (1 << lev);
      const auto tr = cn_evolve(sample_mode(ff[2], fd_nodes(kPi, ny)), rb, kPi, {ny, dt, 100 << lev});
      const double rate_err = std::abs(cn_projected_rate(tr, ff[2], tt[2].pairing) + kI * tt[2].mu);
      const double e = energy_identity_residual(tr, rb);
      if (lev > 0) {
        CHECK(std::log2(prev_rate / rate_err) >= 1.8);
        CHECK(std::log2(prev_energy / e) >= 1.8);
      }
      prev_rate = rate_err;
      prev_energy = e;
    }
  }
}

TEST_CASE("smoothing functional") {
  const auto p = EvolutionPlan::build(table11(), 20.0, 64, 6);
  CHECK_THROWS_AS(smoothing_functional(p, zero_state(p), 0.5, 1.0, 11), SolverError);
  CHECK_THROWS_AS(smoothing_functional(p, zero_state(p), 0.75, 1.0, 10), SolverError);
  CHECK(smoothing_functional(p, zero_state(p), 0.75, 1.0, 11).q_full == 0.0);
  const auto u0 = random_state(p, 6, 8);
  const auto q = smoothing_functional(p, u0, 0.75, 4.0, 81);
  CHECK(q.q_half <= q.q_full);
  CHECK(q.tail_increment() >= 0.0);
  CHECK(q.q_full > 0.0);
}

TEST_CASE("catalog is deterministic") {
  const auto p = EvolutionPlan::build(table11(), 20.0, 64, 6);
  CHECK((random_state(p, 4, 5).coeffs - random_state(p, 4, 5).coeffs).norm() == 0.0);
  CHECK((random_state(p, 4, 5).coeffs - random_state(p, 4, 6).coeffs).norm() > 0.0);
  CHECK(random_state(p, 4, 5).coeffs.row(5).norm() == 0.0);
  CHECK_THROWS_AS(random_state(p, 7, 1), SolverError);
  CHECK_THROWS_AS(mode_pure_state(p, 6, gaussian_profile(p, 0, 1, 0)), SolverError);
}
