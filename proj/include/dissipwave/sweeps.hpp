#pragma once

#include <optional>
#include <vector>

#include "dissipwave/spectrum_geometry.hpp"
#include "dissipwave/transverse_spectrum.hpp"

namespace dissipwave {

struct TrajectoryPoint {
  double s = 0.0;
  int n = 0;
  cplx lambda;
  cplx mu;
};

/// Sign change of Im mu_n along the sweep, refined by bisection on s.
struct Crossing {
  int n = 0;
  double s_star = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double im_mu = 0.0;  // Im mu_n at s_star
};

struct GapSample {
  double s = 0.0;
  double gap = 0.0;
  std::optional<int> attaining_index;  // empty: tail
};

struct SweepReport {
  RobinPair direction;
  Geometry geometry;
  std::vector<double> s_grid;
  std::vector<std::vector<TrajectoryPoint>> branches;  // index n
  std::vector<std::optional<Crossing>> crossings;      // index n, empty: no crossing up to s_max
  std::vector<GapSample> gap_curve;

  /// Smallest crossing over all branches, if any.
  [[nodiscard]] std::optional<Crossing> min_crossing() const;
};

/// s_k = s_max k / (steps - 1), k = 0..steps-1.
std::vector<double> uniform_s_grid(double s_max, int steps);

/// Branch n of (s a_l, s a_0) on a uniform grid of `steps` points in [0, s_max].
/// Warm-started from point to point; consecutive points must differ by less
/// than nu / 2 (BranchJump otherwise).
std::vector<TrajectoryPoint> trajectory(int n, const RobinPair& direction, const Geometry& geom,
                                        double s_max, int steps, const SolverOptions& opts = {});

std::vector<TrajectoryPoint> trajectory(int n, const RobinPair& direction, const Geometry& geom,
                                        const std::vector<double>& s_grid, const SolverOptions& opts = {});

/// Requires a_l a_0 < 0 and a_l + a_0 > 0 (PreconditionViolated otherwise).
/// Branches 0..n_max are swept; the first upward sign change of Im mu_n on
/// the grid is bisected down to a bracket below 1e-12.
SweepReport overdamping_scan(const RobinPair& direction, const Geometry& geom, int n_max, double s_max,
                             int steps, const SolverOptions& opts = {});

/// gap(s) = min(min_{n <= n_max} -Im mu_n(s), -tail(s)) with warm-started branches.
std::vector<GapSample> gap_curve(const RobinPair& direction, const Geometry& geom,
                                 const std::vector<double>& s_grid, int n_max,
                                 const SolverOptions& opts = {});

/// Default figure parameters: l = pi, branches 0..30, direction (1, -0.5).
struct FigureParams {
  Geometry geometry = Geometry::with_width(std::numbers::pi);
  int n_max = 30;
  RobinPair direction{1.0, -0.5};
  double s_max = 1.0;
  int steps = 101;
};

/// All branch trajectories plus the gap curve over the same grid.
SweepReport figure_data(const FigureParams& params, const SolverOptions& opts = {});

}  // namespace dissipwave
