#include "dissipwave/transverse_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dissipwave/eigenbasis.hpp"
#include "dissipwave/parallel.hpp"

namespace dissipwave {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Relative unscaled residual above which an iterate inside the pole guard is
// treated as sitting on a genuine pole of g rather than a removable one.
constexpr double kPoleResidualLimit = 1e-3;

struct Parts {
  cplx num;    // (lambda - a_l)(lambda - a_0)
  cplx den;    // (lambda + a_l)(lambda + a_0)
  cplx dnum;
  cplx dden;
  cplx phase;  // exp(2 i lambda l)
};

Parts parts(cplx lambda, const RobinPair& r, const Geometry& g) {
  Parts p;
  p.num = (lambda - r.a_l) * (lambda - r.a_0);
  p.den = (lambda + r.a_l) * (lambda + r.a_0);
  p.dnum = 2.0 * lambda - (r.a_l + r.a_0);
  p.dden = 2.0 * lambda + (r.a_l + r.a_0);
  p.phase = std::exp(2.0 * kI * lambda * g.l);
  return p;
}

bool inside_pole_guard(cplx lambda, const RobinPair& r) {
  return std::abs(lambda + r.a_l) <= pole_guard_radius(r.a_l) ||
         std::abs(lambda + r.a_0) <= pole_guard_radius(r.a_0);
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void SolverOptions::validate() const {
  if (!(newton_tol > 0.0)) throw SolverError(ErrorKind::InvalidArgument, "newton_tol must be positive");
  if (max_newton_iters < 1) throw SolverError(ErrorKind::InvalidArgument, "max_newton_iters must be >= 1");
  if (!(min_continuation_step > 0.0) || !(min_continuation_step <= initial_continuation_step) ||
      !(initial_continuation_step <= 1.0)) {
    throw SolverError(ErrorKind::InvalidArgument,
                      "continuation steps must satisfy 0 < min <= initial <= 1");
  }
}

double pole_guard_radius(double a) { return 1e-6 * std::max(1.0, std::abs(a)); }

CharacteristicValue characteristic(cplx lambda, const RobinPair& robin, const Geometry& geom) {
  const Parts p = parts(lambda, robin, geom);
  if (inside_pole_guard(lambda, robin)) return {p.num * p.phase - p.den, false};
  return {p.num / p.den * p.phase - 1.0, true};
}

cplx characteristic_unscaled(cplx lambda, const RobinPair& robin, const Geometry& geom) {
  const Parts p = parts(lambda, robin, geom);
  return p.num * p.phase - p.den;
}

cplx characteristic_derivative(cplx lambda, const RobinPair& robin, const Geometry& geom) {
  const Parts p = parts(lambda, robin, geom);
  const cplx two_il = 2.0 * kI * geom.l;
  if (inside_pole_guard(lambda, robin)) {
    return (p.dnum + p.num * two_il) * p.phase - p.dden;
  }
  const cplx ratio = p.num / p.den;
  const cplx dratio = (p.dnum * p.den - p.num * p.dden) / (p.den * p.den);
  return (dratio + ratio * two_il) * p.phase;
}

double characteristic_residual(cplx lambda, const RobinPair& robin, const Geometry& geom) {
  const Parts p = parts(lambda, robin, geom);
  if (!inside_pole_guard(lambda, robin)) return std::abs(p.num / p.den * p.phase - 1.0);
  const cplx lhs = p.num * p.phase;
  const double f = std::abs(lhs - p.den);
  if (f == 0.0) return 0.0;
  return f / (std::abs(lhs) + std::abs(p.den));
}

cplx asymptotic_seed(int n, const RobinPair& robin, const Geometry& geom) {
  if (n < 1) throw SolverError(ErrorKind::InvalidArgument, "asymptotic_seed needs n >= 1");
  return cplx(n * geom.nu, -robin.sum() / (n * std::numbers::pi));
}

NewtonResult newton_refine(cplx seed, const RobinPair& robin, const Geometry& geom,
                           const SolverOptions& opts) {
  if (!finite(seed)) throw SolverError(ErrorKind::InvalidArgument, "Newton seed is not finite");

  NewtonResult out{seed, characteristic_residual(seed, robin, geom), 0, true};
  for (int it = 0; it <= opts.max_newton_iters; ++it) {
    const bool guarded = inside_pole_guard(out.lambda, robin);
    out.scaled = !guarded;
    out.iterations = it;
    if (out.residual <= opts.newton_tol) return out;
    if (guarded && out.residual > kPoleResidualLimit) {
      throw SolverError(ErrorKind::PoleProximity, "Newton iterate entered the pole guard");
    }
    if (it == opts.max_newton_iters) break;

    const cplx f = characteristic(out.lambda, robin, geom).value;
    const cplx df = characteristic_derivative(out.lambda, robin, geom);
    if (!finite(df) || df == cplx{}) break;
    const cplx step = -f / df;

    // Damping: halve until the residual decreases.
    bool improved = false;
    double t = 1.0;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const cplx trial = out.lambda + t * step;
      const double r = characteristic_residual(trial, robin, geom);
      if (std::isfinite(r) && r < out.residual) {
        out.lambda = trial;
        out.residual = r;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  throw SolverError(ErrorKind::NoConvergence,
                    "Newton did not reach tolerance (residual " + std::to_string(out.residual) + ")");
}

cplx branch_sqrt(cplx mu) {
  cplx r = std::sqrt(mu);
  if (r.real() < 0.0) r = -r;
  return r;
}

BranchTracker::BranchTracker(int n, const RobinPair& direction, const Geometry& geom,
                             const SolverOptions& opts)
    : n_(n), direction_(direction), geom_(geom), opts_(opts), step_(opts.initial_continuation_step) {
  if (n < 0) throw SolverError(ErrorKind::InvalidArgument, "branch index must be >= 0");
  opts_.validate();
  lambda_ = cplx(n * geom.nu, 0.0);
  initial_slope_ = -2.0 * kI * direction.sum() / geom.l;
}

bool BranchTracker::exact_branch() const {
  // Neumann direction: nothing moves. Balanced pair with n = 0: the branch is
  // lambda = s |a_0| exactly, a root that cancels out of the scaled form.
  return direction_.is_zero() || (n_ == 0 && direction_.sum() == 0.0);
}

cplx BranchTracker::exact_lambda(double s) const {
  if (direction_.is_zero()) return cplx(n_ * geom_.nu, 0.0);
  return cplx(s * std::abs(direction_.a_0), 0.0);
}

bool BranchTracker::guard_ok(cplx lambda, double s_new) const {
  if (!finite(lambda)) return false;
  const double sum = direction_.sum() * s_new;
  if (n_ == 0 && sum != 0.0 && std::abs(lambda) < 1e-12) return false;  // spurious root at 0
  if (!opts_.band_guard || sum == 0.0) return true;

  const double re = lambda.real();
  const double lo = std::max(0.0, (n_ - 1) * geom_.nu);
  const double hi = (n_ + 1) * geom_.nu;
  if (!(re > lo && re < hi)) return false;
  if (n_ > 0 && side_ != 0) {
    const double tol_line = 64.0 * kEps * std::max(1.0, n_ * geom_.nu);
    if ((re - n_ * geom_.nu) * side_ < -tol_line) return false;
  }
  return true;
}

BranchTracker::StepOutcome BranchTracker::try_step(double s_new, cplx& lambda_out,
                                                   double& residual_out) const {
  const cplx slope = prev_s_ ? (mu() - prev_mu_) / (s_ - *prev_s_) : initial_slope_;
  const cplx mu_pred = mu() + (s_new - s_) * slope;
  const cplx seed = branch_sqrt(mu_pred);
  const RobinPair robin = direction_.scaled(s_new);
  try {
    const NewtonResult res = newton_refine(seed, robin, geom_, opts_);
    cplx lam = res.lambda;
    if (lam.real() < 0.0) lam = -lam;
    if (std::abs(lam - lambda_) >= 0.5 * geom_.nu) return StepOutcome::Jumped;
    if (!guard_ok(lam, s_new)) return StepOutcome::GuardViolated;
    lambda_out = lam;
    residual_out = res.residual;
    return StepOutcome::Accepted;
  } catch (const SolverError&) {
    return StepOutcome::NewtonFailed;
  }
}

void BranchTracker::advance_to(double s_target) {
  if (!(s_target >= s_)) {
    throw SolverError(ErrorKind::InvalidArgument, "branch tracker only moves forward in s");
  }
  if (exact_branch()) {
    s_ = s_target;
    lambda_ = exact_lambda(s_);
    residual_ = 0.0;
    return;
  }

  if (n_ == 0 && s_ == 0.0 && s_target > 0.0) {
    // Leave the degenerate origin along the first-order law
    // d(lambda_0^2)/ds = -i (a_l + a_0) / l.
    const double mag = std::abs(direction_.a_l) + std::abs(direction_.a_0);
    double s0 = std::min({1.0, 1e-2 / (mag + 1.0), s_target});
    bool started = false;
    for (int attempt = 0; attempt < 40 && !started; ++attempt, s0 *= 0.5) {
      const cplx seed = branch_sqrt(-kI * s0 * direction_.sum() / geom_.l);
      try {
        const NewtonResult res = newton_refine(seed, direction_.scaled(s0), geom_, opts_);
        cplx lam = res.lambda;
        if (lam.real() < 0.0) lam = -lam;
        if (!guard_ok(lam, s0)) continue;
        prev_s_ = 0.0;
        prev_mu_ = cplx{};
        s_ = s0;
        lambda_ = lam;
        residual_ = res.residual;
        started = true;
      } catch (const SolverError&) {
      }
    }
    if (!started) throw SolverError(ErrorKind::ContinuationStall, "could not leave the origin for n = 0");
  }

  StepOutcome last = StepOutcome::Accepted;
  while (s_ < s_target) {
    const double h = std::min(step_, s_target - s_);
    const double s_new = (s_target - s_ <= step_) ? s_target : s_ + h;
    cplx lam;
    double res = 0.0;
    last = try_step(s_new, lam, res);
    if (last == StepOutcome::Accepted) {
      prev_s_ = s_;
      prev_mu_ = mu();
      s_ = s_new;
      lambda_ = lam;
      residual_ = res;
      if (side_ == 0 && n_ > 0 && direction_.sum() != 0.0) {
        const double d = lambda_.real() - n_ * geom_.nu;
        if (std::abs(d) > 64.0 * kEps * std::max(1.0, n_ * geom_.nu)) side_ = d > 0 ? 1 : -1;
      }
      if (++successes_ >= 2) {
        step_ = std::min(2.0 * step_, opts_.initial_continuation_step);
        successes_ = 0;
      }
      continue;
    }
    successes_ = 0;
    step_ = 0.5 * h;
    if (step_ < opts_.min_continuation_step) {
      const std::string where = "branch " + std::to_string(n_) + " at s = " + std::to_string(s_);
      switch (last) {
        case StepOutcome::GuardViolated:
          throw SolverError(ErrorKind::BandViolation, where + ": iterate left its band");
        case StepOutcome::Jumped:
          throw SolverError(ErrorKind::BranchJump, where + ": continuity guard violated");
        default:
          throw SolverError(ErrorKind::ContinuationStall, where + ": step fell below the floor");
      }
    }
  }
}

TransverseMode solve_mode(int n, const RobinPair& robin, const Geometry& geom, const SolverOptions& opts) {
  BranchTracker tracker(n, robin, geom, opts);
  tracker.advance_to(1.0);
  TransverseMode m;
  m.n = n;
  m.lambda = tracker.lambda();
  m.mu = m.lambda * m.lambda;
  m.residual = tracker.residual();
  return m;
}

SpectrumTable solve_spectrum(int n_max, const RobinPair& robin, const Geometry& geom,
                             const SolverOptions& opts) {
  if (n_max < 0) throw SolverError(ErrorKind::InvalidArgument, "n_max must be >= 0");
  opts.validate();

  SpectrumTable table{geom, robin, std::vector<TransverseMode>(static_cast<std::size_t>(n_max) + 1)};
  parallel_for(table.modes.size(), [&](std::size_t i) {
    const int n = static_cast<int>(i);
    try {
      TransverseMode m = solve_mode(n, robin, geom, opts);
      const EigenfunctionForm form = make_eigenfunction(m, robin, geom);
      m.norm_coeff = form.norm_coeff;
      m.pairing = self_pairing(form);
      table.modes[i] = m;
    } catch (const SolverError& e) {
      throw SolverError(e.kind(), "mode " + std::to_string(n) + ": " + e.what());
    }
  });

  for (std::size_t i = 1; i < table.modes.size(); ++i) {
    if (!(table.modes[i].lambda.real() > table.modes[i - 1].lambda.real())) {
      throw SolverError(ErrorKind::BranchJump,
                        "Re(lambda) not increasing at mode " + std::to_string(i));
    }
  }
  for (std::size_t j = 0; j < table.modes.size(); ++j) {
    for (std::size_t k = j + 1; k < table.modes.size(); ++k) {
      const cplx a = table.modes[j].mu;
      const cplx b = table.modes[k].mu;
      if (std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
        throw SolverError(ErrorKind::BranchJump, "modes " + std::to_string(j) + " and " +
                                                     std::to_string(k) + " share an eigenvalue");
      }
    }
  }
  return table;
}

}  // namespace dissipwave
