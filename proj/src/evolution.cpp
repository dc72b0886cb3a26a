#include "dissipwave/evolution.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <unsupported/Eigen/FFT>

#include "dissipwave/parallel.hpp"

namespace dissipwave {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

using Row = std::vector<cplx>;

Row row_of(const Eigen::MatrixXcd& m, Eigen::Index r) {
  Row out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

void set_row(Eigen::MatrixXcd& m, Eigen::Index r, const Row& v) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = v[static_cast<std::size_t>(c)];
}

// Applies a Fourier multiplier to one periodic row.
Row apply_multiplier(const Row& in, const std::vector<cplx>& symbol) {
  Eigen::FFT<double> fft;
  Row spec;
  fft.fwd(spec, in);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= symbol[k];
  Row out;
  fft.inv(out, spec);
  return out;
}

// Quadratic form sum_jk X_jk G_jk with X = dx * A A^H over the selected columns.
double gram_quadratic(const Eigen::MatrixXcd& rows, const Eigen::MatrixXcd& gram, double dx) {
  const Eigen::MatrixXcd x = dx * rows * rows.adjoint();
  return x.cwiseProduct(gram).sum().real();
}

}  // namespace

EvolutionPlan EvolutionPlan::build(const SpectrumTable& table, double x_box, int n_x, int n_modes) {
  return build(table, x_box, n_x, n_modes, YGrid::for_modes(table.geometry.l, n_modes));
}

EvolutionPlan EvolutionPlan::build(const SpectrumTable& table, double x_box, int n_x, int n_modes,
                                   YGrid y_grid) {
  if (!(x_box > 0.0)) throw SolverError(ErrorKind::InvalidArgument, "x box half-width must be positive");
  if (n_x < 16 || !power_of_two(n_x)) {
    throw SolverError(ErrorKind::InvalidArgument, "n_x must be a power of two >= 16");
  }
  if (n_modes < 1 || static_cast<std::size_t>(n_modes) > table.size()) {
    throw SolverError(ErrorKind::InvalidArgument, "n_modes must be in [1, table size]");
  }
  EvolutionPlan p;
  p.geom = table.geometry;
  p.robin = table.robin;
  p.table = table;
  p.duals = dual_family(table, static_cast<std::size_t>(n_modes));
  p.x_box = x_box;
  p.n_x = n_x;
  p.n_modes = n_modes;
  p.y_grid = std::move(y_grid);
  p.gram = gram_matrix(p.duals.forms);
  const auto ny = static_cast<Eigen::Index>(p.y_grid.nodes.size());
  p.phi_on_y.resize(ny, n_modes);
  for (Eigen::Index q = 0; q < ny; ++q) {
    for (int n = 0; n < n_modes; ++n) {
      p.phi_on_y(q, n) = eigenfunction_eval(p.duals.forms[static_cast<std::size_t>(n)],
                                            p.y_grid.nodes[static_cast<std::size_t>(q)]);
    }
  }
  return p;
}

std::vector<double> EvolutionPlan::x_nodes() const {
  std::vector<double> x(static_cast<std::size_t>(n_x));
  for (int j = 0; j < n_x; ++j) x[static_cast<std::size_t>(j)] = -x_box + j * dx();
  return x;
}

std::vector<double> EvolutionPlan::frequencies() const {
  std::vector<double> xi(static_cast<std::size_t>(n_x));
  const double base = std::numbers::pi / x_box;
  for (int k = 0; k < n_x; ++k) {
    const int m = k < n_x / 2 ? k : k - n_x;
    xi[static_cast<std::size_t>(k)] = base * m;
  }
  return xi;
}

ModalState zero_state(const EvolutionPlan& plan) {
  return {0.0, Eigen::MatrixXcd::Zero(plan.n_modes, plan.n_x)};
}

InitialDecomposition initial_decompose(const EvolutionPlan& plan, const WaveState& u0) {
  const auto ny = static_cast<Eigen::Index>(plan.y_grid.nodes.size());
  if (u0.values.rows() != plan.n_x || u0.values.cols() != ny) {
    throw SolverError(ErrorKind::InvalidArgument, "initial data shape does not match the plan");
  }
  // M_qn = w_q phi_n(y_q) / p_n, so coefficients = (U M)^T.
  Eigen::MatrixXcd m(ny, plan.n_modes);
  for (Eigen::Index q = 0; q < ny; ++q) {
    for (int n = 0; n < plan.n_modes; ++n) {
      m(q, n) = plan.y_grid.weights[static_cast<std::size_t>(q)] * plan.phi_on_y(q, n) /
                plan.duals.pairings[static_cast<std::size_t>(n)];
    }
  }
  InitialDecomposition out;
  out.state.t = u0.t;
  out.state.coeffs = (u0.values * m).transpose();

  const WaveState back = synthesize(plan, out.state);
  WaveState diff{u0.t, u0.values - back.values};
  const double base = grid_norm(plan, u0);
  const double err = grid_norm(plan, diff);
  out.defect = base > 0.0 ? err / base : err;
  if (out.defect > 1e-4) {
    throw SolverError(ErrorKind::TruncationTooCoarse,
                      "modal truncation defect " + std::to_string(out.defect) + " exceeds 1e-4");
  }
  return out;
}

ModalState propagate(const EvolutionPlan& plan, const ModalState& state, double t_target) {
  if (!(t_target >= state.t)) throw SolverError(ErrorKind::InvalidArgument, "propagate only runs forward");
  const double tau = t_target - state.t;
  ModalState out{t_target, state.coeffs};
  if (tau == 0.0) return out;

  const auto xi = plan.frequencies();
  std::vector<cplx> free(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) free[k] = std::exp(-kI * tau * xi[k] * xi[k]);

  parallel_for(static_cast<std::size_t>(plan.n_modes), [&](std::size_t n) {
    const auto r = static_cast<Eigen::Index>(n);
    const cplx modal = std::exp(-kI * tau * plan.duals.forms[n].mode.mu);
    Row row = apply_multiplier(row_of(state.coeffs, r), free);
    for (auto& v : row) v *= modal;
    set_row(out.coeffs, r, row);
  });
  return out;
}

WaveState synthesize(const EvolutionPlan& plan, const ModalState& state) {
  return {state.t, state.coeffs.transpose() * plan.phi_on_y.transpose()};
}

double state_norm(const EvolutionPlan& plan, const ModalState& state) {
  return std::sqrt(std::max(0.0, gram_quadratic(state.coeffs, plan.gram, plan.dx())));
}

double grid_norm(const EvolutionPlan& plan, const WaveState& state) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < state.values.rows(); ++j) {
    for (Eigen::Index q = 0; q < state.values.cols(); ++q) {
      acc += plan.y_grid.weights[static_cast<std::size_t>(q)] * std::norm(state.values(j, q));
    }
  }
  return std::sqrt(acc * plan.dx());
}

double edge_mass_fraction(const EvolutionPlan& plan, const ModalState& state) {
  const auto x = plan.x_nodes();
  Eigen::MatrixXcd edge = Eigen::MatrixXcd::Zero(state.coeffs.rows(), state.coeffs.cols());
  for (Eigen::Index j = 0; j < state.coeffs.cols(); ++j) {
    if (std::abs(x[static_cast<std::size_t>(j)]) > 0.9 * plan.x_box) edge.col(j) = state.coeffs.col(j);
  }
  const double total = gram_quadratic(state.coeffs, plan.gram, plan.dx());
  if (total <= 0.0) return 0.0;
  return std::max(0.0, gram_quadratic(edge, plan.gram, plan.dx())) / total;
}

DecayFit decay_fit(std::span<const double> times, std::span<const double> norms, double window_begin,
                   double window_end) {
  if (times.size() != norms.size()) throw SolverError(ErrorKind::InvalidArgument, "times/norms size mismatch");
  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window_begin || times[i] > window_end) continue;
    if (!(norms[i] > 0.0)) throw SolverError(ErrorKind::NonPositiveNorm, "norm samples must be positive");
    ts.push_back(times[i]);
    ys.push_back(std::log(norms[i]));
  }
  if (ts.size() < 8) throw SolverError(ErrorKind::InvalidArgument, "decay fit needs >= 8 samples in the window");

  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) mt += ts[i], my += ys[i];
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
  }
  const double slope = sty / stt;
  DecayFit fit;
  fit.rate = -slope;
  fit.intercept = my - slope * mt;
  fit.window_begin = window_begin;
  fit.window_end = window_end;
  double rss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (fit.intercept + slope * ts[i]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

void CNConfig::validate() const {
  if (n_y < 32) throw SolverError(ErrorKind::InvalidArgument, "CN grid needs n_y >= 32");
  if (!(dt > 0.0)) throw SolverError(ErrorKind::InvalidArgument, "CN time step must be positive");
  if (steps < 1) throw SolverError(ErrorKind::InvalidArgument, "CN needs at least one step");
}

std::vector<double> fd_nodes(const Geometry& geom, int n_y) {
  std::vector<double> y(static_cast<std::size_t>(n_y) + 1);
  for (int k = 0; k <= n_y; ++k) y[static_cast<std::size_t>(k)] = k == n_y ? geom.l : k * geom.l / n_y;
  return y;
}

double CNTrajectory::norm(std::size_t k) const {
  const auto& v = states[k];
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = (i == 0 || i + 1 == v.size()) ? 0.5 * h : h;
    acc += w * std::norm(v[i]);
  }
  return std::sqrt(acc);
}

namespace {

// Tridiagonal finite-difference Laplacian with ghost-point Robin closure.
struct Tridiag {
  std::vector<cplx> lower, diag, upper;  // lower[0], upper[n-1] unused
};

Tridiag fd_laplacian(const RobinPair& robin, double h, std::size_t nodes) {
  Tridiag d{std::vector<cplx>(nodes), std::vector<cplx>(nodes), std::vector<cplx>(nodes)};
  const double inv_h2 = 1.0 / (h * h);
  for (std::size_t k = 0; k < nodes; ++k) {
    d.lower[k] = inv_h2;
    d.diag[k] = -2.0 * inv_h2;
    d.upper[k] = inv_h2;
  }
  d.upper[0] = 2.0 * inv_h2;
  d.diag[0] = (-2.0 + 2.0 * kI * h * robin.a_0) * inv_h2;
  d.lower[nodes - 1] = 2.0 * inv_h2;
  d.diag[nodes - 1] = (-2.0 + 2.0 * kI * h * robin.a_l) * inv_h2;
  return d;
}

}  // namespace

CNTrajectory cn_evolve(std::span<const cplx> v0, const RobinPair& robin, const Geometry& geom,
                       const CNConfig& cfg) {
  cfg.validate();
  const std::size_t nodes = static_cast<std::size_t>(cfg.n_y) + 1;
  if (v0.size() != nodes) throw SolverError(ErrorKind::InvalidArgument, "initial vector must have n_y + 1 nodes");

  CNTrajectory traj;
  traj.h = geom.l / cfg.n_y;
  traj.dt = cfg.dt;
  traj.states.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  traj.states.emplace_back(v0.begin(), v0.end());

  const Tridiag lap = fd_laplacian(robin, traj.h, nodes);
  const cplx half = 0.5 * kI * cfg.dt;

  // LHS = I - half * D, factorized once (Thomas).
  std::vector<cplx> c_prime(nodes), denom(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const cplx a = -half * lap.lower[k];
    const cplx b = 1.0 - half * lap.diag[k];
    const cplx c = -half * lap.upper[k];
    denom[k] = k == 0 ? b : b - a * c_prime[k - 1];
    if (!(std::abs(denom[k]) > 1e-300) || !std::isfinite(std::abs(denom[k]))) {
      throw SolverError(ErrorKind::LinearSolveFailure, "tridiagonal pivot vanished");
    }
    c_prime[k] = c / denom[k];
  }

  std::vector<cplx> rhs(nodes), next(nodes);
  for (int step = 0; step < cfg.steps; ++step) {
    const auto& v = traj.states.back();
    for (std::size_t k = 0; k < nodes; ++k) {
      cplx dv = lap.diag[k] * v[k];
      if (k > 0) dv += lap.lower[k] * v[k - 1];
      if (k + 1 < nodes) dv += lap.upper[k] * v[k + 1];
      rhs[k] = v[k] + half * dv;
    }
    for (std::size_t k = 0; k < nodes; ++k) {
      const cplx a = -half * lap.lower[k];
      rhs[k] = (k == 0 ? rhs[k] : rhs[k] - a * rhs[k - 1]) / denom[k];
    }
    next[nodes - 1] = rhs[nodes - 1];
    for (std::size_t k = nodes - 1; k-- > 0;) next[k] = rhs[k] - c_prime[k] * next[k + 1];
    traj.states.push_back(next);
  }
  return traj;
}

double energy_identity_residual(const CNTrajectory& traj, const RobinPair& robin) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const auto& a = traj.states[k];
    const auto& b = traj.states[k + 1];
    const double n0 = traj.norm(k);
    const double n1 = traj.norm(k + 1);
    const double drift = (n1 * n1 - n0 * n0) / traj.dt;
    const double flux = robin.a_l * (std::norm(a.back()) + std::norm(b.back())) +
                        robin.a_0 * (std::norm(a.front()) + std::norm(b.front()));
    worst = std::max(worst, std::abs(drift + flux));
  }
  return worst;
}

cplx cn_projected_rate(const CNTrajectory& traj, const EigenfunctionForm& form, cplx pairing) {
  const std::size_t nodes = traj.states.front().size();
  std::vector<cplx> weight(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double w = (i == 0 || i + 1 == nodes) ? 0.5 * traj.h : traj.h;
    const double y = i + 1 == nodes ? form.l : static_cast<double>(i) * traj.h;
    weight[i] = w * eigenfunction_eval(form, y) / pairing;
  }
  auto project = [&](const std::vector<cplx>& v) {
    cplx acc{};
    for (std::size_t i = 0; i < nodes; ++i) acc += weight[i] * v[i];
    return acc;
  };
  cplx total{};
  cplx prev = project(traj.states.front());
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const cplx cur = project(traj.states[k]);
    total += std::log(cur / prev);
    prev = cur;
  }
  return total / (traj.dt * static_cast<double>(traj.states.size() - 1));
}

std::vector<cplx> fd_transverse_eigenvalues(const RobinPair& robin, const Geometry& geom, int n_y) {
  if (n_y < 2) throw SolverError(ErrorKind::InvalidArgument, "n_y must be >= 2");
  const std::size_t nodes = static_cast<std::size_t>(n_y) + 1;
  const Tridiag lap = fd_laplacian(robin, geom.l / n_y, nodes);
  const auto n = static_cast<Eigen::Index>(nodes);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    a(k, k) = -lap.diag[kk];
    if (k > 0) a(k, k - 1) = -lap.lower[kk];
    if (k + 1 < n) a(k, k + 1) = -lap.upper[kk];
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
  std::vector<cplx> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
  return ev;
}

SmoothingResult smoothing_functional(const EvolutionPlan& plan, const ModalState& u0, double delta,
                                     double horizon, int n_t) {
  if (!(delta > 0.5)) throw SolverError(ErrorKind::DeltaOutOfRange, "delta must exceed 1/2");
  if (!(horizon > 0.0)) throw SolverError(ErrorKind::InvalidArgument, "horizon must be positive");
  if (n_t < 3 || n_t % 2 == 0) throw SolverError(ErrorKind::InvalidArgument, "n_t must be odd and >= 3");

  const auto xi = plan.frequencies();
  std::vector<cplx> symbol(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) symbol[k] = std::pow(1.0 + xi[k] * xi[k], 0.25);
  const auto x = plan.x_nodes();
  std::vector<double> weight(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) weight[j] = std::pow(1.0 + x[j] * x[j], -0.5 * delta);

  const double dt = horizon / (n_t - 1);
  std::vector<double> integrand(static_cast<std::size_t>(n_t));
  parallel_for(integrand.size(), [&](std::size_t i) {
    const ModalState s = propagate(plan, u0, u0.t + dt * static_cast<double>(i));
    Eigen::MatrixXcd w(s.coeffs.rows(), s.coeffs.cols());
    for (Eigen::Index n = 0; n < s.coeffs.rows(); ++n) {
      Row row = apply_multiplier(row_of(s.coeffs, n), symbol);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] *= weight[j];
      set_row(w, n, row);
    }
    integrand[i] = std::max(0.0, gram_quadratic(w, plan.gram, plan.dx()));
  });

  SmoothingResult r;
  const int mid = (n_t - 1) / 2;
  double acc = 0.0;
  for (int i = 1; i < n_t; ++i) {
    acc += 0.5 * dt * (integrand[static_cast<std::size_t>(i - 1)] + integrand[static_cast<std::size_t>(i)]);
    if (i == mid) r.q_half = acc;
  }
  r.q_full = acc;
  return r;
}

std::vector<cplx> gaussian_profile(const EvolutionPlan& plan, double center, double width, double wavenumber) {
  const auto x = plan.x_nodes();
  std::vector<cplx> f(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = (x[j] - center) / width;
    f[j] = std::exp(-0.5 * d * d) * std::exp(kI * wavenumber * x[j]);
  }
  return f;
}

ModalState mode_pure_state(const EvolutionPlan& plan, int n, std::span<const cplx> profile) {
  if (n < 0 || n >= plan.n_modes) throw SolverError(ErrorKind::InvalidArgument, "mode index outside the plan");
  if (profile.size() != static_cast<std::size_t>(plan.n_x)) {
    throw SolverError(ErrorKind::InvalidArgument, "profile length must equal n_x");
  }
  ModalState s = zero_state(plan);
  for (int j = 0; j < plan.n_x; ++j) s.coeffs(n, j) = profile[static_cast<std::size_t>(j)];
  return s;
}

WaveState gaussian_wave(const EvolutionPlan& plan, double x_center, double x_width, double wavenumber,
                        double y_center, double y_width) {
  const auto f = gaussian_profile(plan, x_center, x_width, wavenumber);
  const auto ny = static_cast<Eigen::Index>(plan.y_grid.nodes.size());
  WaveState w{0.0, Eigen::MatrixXcd(plan.n_x, ny)};
  for (Eigen::Index q = 0; q < ny; ++q) {
    const double d = (plan.y_grid.nodes[static_cast<std::size_t>(q)] - y_center) / y_width;
    const double g = std::exp(-0.5 * d * d);
    for (int j = 0; j < plan.n_x; ++j) w.values(j, q) = f[static_cast<std::size_t>(j)] * g;
  }
  return w;
}

ModalState random_state(const EvolutionPlan& plan, int modes, std::uint64_t seed) {
  if (modes < 1 || modes > plan.n_modes) throw SolverError(ErrorKind::InvalidArgument, "random mode count outside the plan");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ModalState s = zero_state(plan);
  for (int n = 0; n < modes; ++n) {
    const double center = (unit(rng) - 0.5) * 0.4 * plan.x_box;
    const double width = 0.5 + 1.5 * unit(rng);
    const double k0 = (unit(rng) - 0.5) * 2.0;
    const cplx amp = std::polar(0.2 + unit(rng), 2.0 * std::numbers::pi * unit(rng));
    const auto f = gaussian_profile(plan, center, width, k0);
    for (int j = 0; j < plan.n_x; ++j) s.coeffs(n, j) = amp * f[static_cast<std::size_t>(j)];
  }
  return s;
}

}  // namespace dissipwave
