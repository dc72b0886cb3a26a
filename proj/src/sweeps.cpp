#include "dissipwave/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dissipwave/parallel.hpp"

namespace dissipwave {

namespace {

struct TrackedBranch {
  std::vector<TrajectoryPoint> points;
  std::vector<BranchTracker> snapshots;  // tracker state at each grid point
};

void check_grid(const std::vector<double>& s_grid) {
  if (s_grid.empty()) throw SolverError(ErrorKind::InvalidArgument, "s grid is empty");
  if (!(s_grid.front() >= 0.0)) throw SolverError(ErrorKind::InvalidArgument, "s grid must start at s >= 0");
  for (std::size_t k = 1; k < s_grid.size(); ++k) {
    if (!(s_grid[k] > s_grid[k - 1])) throw SolverError(ErrorKind::InvalidArgument, "s grid must be increasing");
  }
}

TrackedBranch track(int n, const RobinPair& direction, const Geometry& geom, const std::vector<double>& s_grid,
                    const SolverOptions& opts, bool keep_snapshots) {
  TrackedBranch out;
  out.points.reserve(s_grid.size());
  BranchTracker tracker(n, direction, geom, opts);
  for (double s : s_grid) {
    tracker.advance_to(s);
    const TrajectoryPoint p{s, n, tracker.lambda(), tracker.mu()};
    if (!out.points.empty() && std::abs(p.lambda - out.points.back().lambda) >= 0.5 * geom.nu) {
      throw SolverError(ErrorKind::BranchJump, "branch " + std::to_string(n) + " moved more than nu/2 between s = " +
                                                   std::to_string(out.points.back().s) + " and s = " +
                                                   std::to_string(s) + "; refine the grid");
    }
    out.points.push_back(p);
    if (keep_snapshots) out.snapshots.push_back(tracker);
  }
  return out;
}

std::vector<TrackedBranch> track_all(int n_max, const RobinPair& direction, const Geometry& geom,
                                     const std::vector<double>& s_grid, const SolverOptions& opts,
                                     bool keep_snapshots) {
  if (n_max < 0) throw SolverError(ErrorKind::InvalidArgument, "n_max must be >= 0");
  check_grid(s_grid);
  std::vector<TrackedBranch> branches(static_cast<std::size_t>(n_max) + 1);
  parallel_for(branches.size(), [&](std::size_t n) {
    branches[n] = track(static_cast<int>(n), direction, geom, s_grid, opts, keep_snapshots);
  });
  return branches;
}

std::vector<GapSample> gaps_from(const std::vector<TrackedBranch>& branches, const RobinPair& direction,
                                 const Geometry& geom, const std::vector<double>& s_grid) {
  std::vector<GapSample> out;
  out.reserve(s_grid.size());
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    GapSample g;
    g.s = s_grid[k];
    g.gap = -tail_imag_for(direction.scaled(s_grid[k]), geom);
    for (std::size_t n = 0; n < branches.size(); ++n) {
      const double v = -branches[n].points[k].mu.imag();
      if (v <= g.gap) {
        g.gap = v;
        g.attaining_index = static_cast<int>(n);
      }
    }
    out.push_back(g);
  }
  return out;
}

std::optional<Crossing> bisect_crossing(const TrackedBranch& b) {
  for (std::size_t k = 1; k < b.points.size(); ++k) {
    const double prev = b.points[k - 1].mu.imag();
    const double cur = b.points[k].mu.imag();
    if (!(prev < 0.0 && cur >= 0.0)) continue;

    BranchTracker lo = b.snapshots[k - 1];
    double hi = b.points[k].s;
    double im_hi = cur;
    for (int it = 0; it < 200 && hi - lo.s() > 1e-12 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo.s() + hi);
      BranchTracker t = lo;
      t.advance_to(mid);
      if (t.mu().imag() < 0.0) {
        lo = t;
      } else {
        hi = mid;
        im_hi = t.mu().imag();
      }
    }
    Crossing c;
    c.n = b.points[k].n;
    c.bracket_lo = lo.s();
    c.bracket_hi = hi;
    const bool take_lo = std::abs(lo.mu().imag()) <= std::abs(im_hi);
    c.s_star = take_lo ? lo.s() : hi;
    c.im_mu = take_lo ? lo.mu().imag() : im_hi;
    return c;
  }
  return std::nullopt;
}

SweepReport assemble(const RobinPair& direction, const Geometry& geom, const std::vector<double>& s_grid,
                     std::vector<TrackedBranch>& tracked) {
  SweepReport r;
  r.direction = direction;
  r.geometry = geom;
  r.s_grid = s_grid;
  r.gap_curve = gaps_from(tracked, direction, geom, s_grid);
  r.crossings.assign(tracked.size(), std::nullopt);
  r.branches.reserve(tracked.size());
  for (auto& b : tracked) r.branches.push_back(std::move(b.points));
  return r;
}

}  // namespace

std::optional<Crossing> SweepReport::min_crossing() const {
  std::optional<Crossing> best;
  for (const auto& c : crossings) {
    if (c && (!best || c->s_star < best->s_star)) best = c;
  }
  return best;
}

std::vector<double> uniform_s_grid(double s_max, int steps) {
  if (steps < 2) throw SolverError(ErrorKind::InvalidArgument, "steps must be >= 2");
  if (!(s_max > 0.0) || !std::isfinite(s_max)) throw SolverError(ErrorKind::InvalidArgument, "s_max must be positive");
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) grid[static_cast<std::size_t>(k)] = s_max * k / (steps - 1);
  grid.back() = s_max;
  return grid;
}

std::vector<TrajectoryPoint> trajectory(int n, const RobinPair& direction, const Geometry& geom, double s_max,
                                        int steps, const SolverOptions& opts) {
  return trajectory(n, direction, geom, uniform_s_grid(s_max, steps), opts);
}

std::vector<TrajectoryPoint> trajectory(int n, const RobinPair& direction, const Geometry& geom,
                                        const std::vector<double>& s_grid, const SolverOptions& opts) {
  check_grid(s_grid);
  return track(n, direction, geom, s_grid, opts, false).points;
}

SweepReport overdamping_scan(const RobinPair& direction, const Geometry& geom, int n_max, double s_max, int steps,
                             const SolverOptions& opts) {
  if (!(direction.a_l * direction.a_0 < 0.0) || !(direction.sum() > 0.0)) {
    throw SolverError(ErrorKind::PreconditionViolated,
                      "overdamping scan needs a_l a_0 < 0 and a_l + a_0 > 0");
  }
  const auto grid = uniform_s_grid(s_max, steps);
  auto tracked = track_all(n_max, direction, geom, grid, opts, true);
  std::vector<std::optional<Crossing>> crossings(tracked.size());
  parallel_for(tracked.size(), [&](std::size_t n) { crossings[n] = bisect_crossing(tracked[n]); });
  SweepReport r = assemble(direction, geom, grid, tracked);
  r.crossings = std::move(crossings);
  return r;
}

std::vector<GapSample> gap_curve(const RobinPair& direction, const Geometry& geom, const std::vector<double>& s_grid,
                                 int n_max, const SolverOptions& opts) {
  const auto tracked = track_all(n_max, direction, geom, s_grid, opts, false);
  return gaps_from(tracked, direction, geom, s_grid);
}

SweepReport figure_data(const FigureParams& params, const SolverOptions& opts) {
  const auto grid = uniform_s_grid(params.s_max, params.steps);
  auto tracked = track_all(params.n_max, params.direction, params.geometry, grid, opts, false);
  return assemble(params.direction, params.geometry, grid, tracked);
}

}  // namespace dissipwave
