#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "dissipwave/eigenbasis.hpp"

namespace dissipwave {

/// Discretization of the strip (-L, L) x (0, l): periodic x grid of n_x points
/// and a quadrature grid in y. The solution is carried as n_modes coefficient
/// rows u_n(t, x) against the transverse eigenbasis.
struct EvolutionPlan {
  Geometry geom;
  RobinPair robin;
  SpectrumTable table;
  DualFamily duals;
  double x_box = 20.0;
  int n_x = 256;
  int n_modes = 0;
  YGrid y_grid;
  Eigen::MatrixXcd gram;       // n_modes x n_modes, <phi_j, phi_k>
  Eigen::MatrixXcd phi_on_y;   // n_y x n_modes

  static EvolutionPlan build(const SpectrumTable& table, double x_box, int n_x, int n_modes);
  static EvolutionPlan build(const SpectrumTable& table, double x_box, int n_x, int n_modes, YGrid y_grid);

  [[nodiscard]] double dx() const { return 2.0 * x_box / n_x; }
  [[nodiscard]] std::vector<double> x_nodes() const;
  /// Angular frequencies of the periodic box in FFT order.
  [[nodiscard]] std::vector<double> frequencies() const;
};

struct ModalState {
  double t = 0.0;
  Eigen::MatrixXcd coeffs;  // n_modes x n_x
};

struct WaveState {
  double t = 0.0;
  Eigen::MatrixXcd values;  // n_x x n_y
};

ModalState zero_state(const EvolutionPlan& plan);

struct InitialDecomposition {
  ModalState state;
  double defect = 0.0;  // ||u0 - sum u_n phi_n|| / ||u0||
};

/// u_n(x) = <u0(x, .), psi_n> on every x node. Throws TruncationTooCoarse when
/// the reconstruction defect exceeds 1e-4.
InitialDecomposition initial_decompose(const EvolutionPlan& plan, const WaveState& u0);

/// Exact in time: each row gets exp(-i tau mu_n) and the free propagator
/// exp(-i tau xi^2) on the discrete frequencies of the box.
ModalState propagate(const EvolutionPlan& plan, const ModalState& state, double t_target);

WaveState synthesize(const EvolutionPlan& plan, const ModalState& state);

/// ||u||^2 = sum_jk <u_j, u_k>_x G_jk.
double state_norm(const EvolutionPlan& plan, const ModalState& state);

/// Grid quadrature norm of sampled values (periodic trapezoid in x).
double grid_norm(const EvolutionPlan& plan, const WaveState& state);

/// Share of ||u||^2 carried by |x| > 0.9 L; wrap-around indicator.
double edge_mass_fraction(const EvolutionPlan& plan, const ModalState& state);

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double window_begin = 0.0;
  double window_end = 0.0;
  double residual = 0.0;  // RMS of the log-norm fit
};

/// Least squares fit of log(norm) = intercept - rate t over samples in the window.
DecayFit decay_fit(std::span<const double> times, std::span<const double> norms, double window_begin,
                   double window_end);

// Crank-Nicolson transverse oracle -----------------------------------------

struct CNConfig {
  int n_y = 64;  // intervals; nodes y_k = k l / n_y
  double dt = 1e-2;
  int steps = 100;

  void validate() const;
  [[nodiscard]] double horizon() const { return dt * steps; }
};

std::vector<double> fd_nodes(const Geometry& geom, int n_y);

struct CNTrajectory {
  double h = 0.0;
  double dt = 0.0;
  std::vector<std::vector<cplx>> states;  // steps + 1 snapshots

  /// Trapezoid L2 norm of snapshot k.
  [[nodiscard]] double norm(std::size_t k) const;
};

CNTrajectory cn_evolve(std::span<const cplx> v0, const RobinPair& robin, const Geometry& geom,
                       const CNConfig& cfg);

/// Max over steps of |d/dt ||v||^2 + 2 (a_l |v(l)|^2 + a_0 |v(0)|^2)| with the
/// time derivative as a forward difference and the boundary flux averaged over
/// the two ends of each step.
double energy_identity_residual(const CNTrajectory& traj, const RobinPair& robin);

/// Complex rate r with <v(t), psi_n> ~ exp(r t), accumulated step by step so
/// the phase is unwrapped. Compare with -i mu_n.
cplx cn_projected_rate(const CNTrajectory& traj, const EigenfunctionForm& form, cplx pairing);

/// Eigenvalues of the finite-difference Robin operator -d^2/dy^2 with ghost
/// point closure, sorted by real part.
std::vector<cplx> fd_transverse_eigenvalues(const RobinPair& robin, const Geometry& geom, int n_y);

// Smoothing functional -----------------------------------------------------

struct SmoothingResult {
  double q_full = 0.0;   // Q(T)
  double q_half = 0.0;   // Q(T / 2)
  [[nodiscard]] double tail_increment() const { return q_full - q_half; }
};

/// Q(T) = \int_0^T || <x>^{-delta} (1 - d_x^2)^{1/4} u(t) ||^2 dt by the
/// trapezoid rule on n_t nodes (odd, so T / 2 is a node).
SmoothingResult smoothing_functional(const EvolutionPlan& plan, const ModalState& u0, double delta,
                                     double horizon, int n_t);

// Initial data catalog -----------------------------------------------------

std::vector<cplx> gaussian_profile(const EvolutionPlan& plan, double center, double width, double wavenumber);

/// f (x) phi_n (y) as a modal state.
ModalState mode_pure_state(const EvolutionPlan& plan, int n, std::span<const cplx> profile);

/// Gaussian (x) Gaussian sampled on the grids.
WaveState gaussian_wave(const EvolutionPlan& plan, double x_center, double x_width, double wavenumber,
                        double y_center, double y_width);

/// First `modes` rows filled with randomly placed Gaussian packets with
/// random complex amplitudes; deterministic for a given seed.
ModalState random_state(const EvolutionPlan& plan, int modes, std::uint64_t seed);

}  // namespace dissipwave
