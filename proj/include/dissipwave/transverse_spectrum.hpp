#pragma once

#include <optional>
#include <vector>

#include "dissipwave/types.hpp"

namespace dissipwave {

struct SolverOptions {
  double newton_tol = 1e-12;
  int max_newton_iters = 60;
  double initial_continuation_step = 1.0 / 16.0;
  double min_continuation_step = 0x1p-20;
  bool band_guard = true;

  void validate() const;
};

/// Value of the characteristic function at lambda.
///
/// Away from the poles -a_l, -a_0 this is the scaled form
///   g(lambda) = N(lambda) / D(lambda) * exp(2 i lambda l) - 1,
///   N = (lambda - a_l)(lambda - a_0),  D = (lambda + a_l)(lambda + a_0),
/// whose magnitude stays O(1) near roots. Inside the pole guard the
/// unscaled F = N exp(2 i lambda l) - D is returned and `scaled` is false.
struct CharacteristicValue {
  cplx value;
  bool scaled = true;
};

/// Radius of the exclusion disc around the pole -a.
double pole_guard_radius(double a);

CharacteristicValue characteristic(cplx lambda, const RobinPair& robin, const Geometry& geom);

/// d/dlambda of whichever form `characteristic` returns at lambda.
cplx characteristic_derivative(cplx lambda, const RobinPair& robin, const Geometry& geom);

/// Unscaled F(lambda), exposed for residual cross-checks.
cplx characteristic_unscaled(cplx lambda, const RobinPair& robin, const Geometry& geom);

/// Residual used for convergence: |g| when scaled, |F| / (|N e| + |D|) otherwise.
double characteristic_residual(cplx lambda, const RobinPair& robin, const Geometry& geom);

/// Two-term large-n / small-a expansion n nu - i (a_l + a_0) / (n pi).
cplx asymptotic_seed(int n, const RobinPair& robin, const Geometry& geom);

struct NewtonResult {
  cplx lambda;
  double residual = 0.0;
  int iterations = 0;
  bool scaled = true;
};

NewtonResult newton_refine(cplx seed, const RobinPair& robin, const Geometry& geom,
                           const SolverOptions& opts);

struct TransverseMode {
  int n = 0;
  cplx lambda;
  cplx mu;
  double residual = 0.0;
  double norm_coeff = 0.0;
  cplx pairing{1.0, 0.0};
};

struct SpectrumTable {
  Geometry geometry;
  RobinPair robin;
  std::vector<TransverseMode> modes;

  [[nodiscard]] std::size_t size() const { return modes.size(); }
  [[nodiscard]] const TransverseMode& operator[](std::size_t n) const { return modes[n]; }
};

/// Principal square root with Re >= 0 (and Im >= 0 on the imaginary axis
/// only when forced by a zero real part).
cplx branch_sqrt(cplx mu);

/// Tracks one branch lambda_n(s a_l, s a_0) forward in s >= 0.
///
/// The tracker starts at s = 0 from the Neumann value n nu (for n = 0 it
/// starts at a small s0 from the first-order expansion of lambda_0^2), and
/// advances with a secant predictor on mu = lambda^2 followed by damped
/// Newton, halving the step on any failure and doubling it again after two
/// consecutive successes.
class BranchTracker {
 public:
  BranchTracker(int n, const RobinPair& direction, const Geometry& geom, const SolverOptions& opts);

  /// Moves the branch to s_target (>= current s). Throws ContinuationStall,
  /// BandViolation or BranchJump when the step floor is reached.
  void advance_to(double s_target);

  [[nodiscard]] double s() const { return s_; }
  [[nodiscard]] int index() const { return n_; }
  [[nodiscard]] cplx lambda() const { return lambda_; }
  [[nodiscard]] cplx mu() const { return lambda_ * lambda_; }
  [[nodiscard]] double residual() const { return residual_; }
  [[nodiscard]] const RobinPair& direction() const { return direction_; }

 private:
  enum class StepOutcome { Accepted, NewtonFailed, GuardViolated, Jumped };

  StepOutcome try_step(double s_new, cplx& lambda_out, double& residual_out) const;
  [[nodiscard]] bool guard_ok(cplx lambda, double s_new) const;
  [[nodiscard]] bool exact_branch() const;
  [[nodiscard]] cplx exact_lambda(double s) const;

  int n_;
  RobinPair direction_;
  Geometry geom_;
  SolverOptions opts_;
  double s_ = 0.0;
  cplx lambda_;
  double residual_ = 0.0;
  std::optional<double> prev_s_;
  cplx prev_mu_;
  cplx initial_slope_;
  double step_;
  int successes_ = 0;
  int side_ = 0;  // sign of Re(lambda) - n nu once established
};

TransverseMode solve_mode(int n, const RobinPair& robin, const Geometry& geom,
                          const SolverOptions& opts = {});

/// Modes 0..n_max with norm coefficients and pairings filled in. Branches are
/// solved in parallel and assembled in index order.
SpectrumTable solve_spectrum(int n_max, const RobinPair& robin, const Geometry& geom,
                             const SolverOptions& opts = {});

}  // namespace dissipwave
