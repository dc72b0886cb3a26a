#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dissipwave {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// Strip cross-section (0, l) and its base frequency nu = pi / l.
struct Geometry {
  double l = std::numbers::pi;
  double nu = 1.0;

  static Geometry with_width(double width);
};

/// Constant boundary absorption: u'(l) = i a_l u(l), u'(0) = -i a_0 u(0).
struct RobinPair {
  double a_l = 0.0;
  double a_0 = 0.0;

  [[nodiscard]] double sum() const { return a_l + a_0; }
  [[nodiscard]] bool is_zero() const { return a_l == 0.0 && a_0 == 0.0; }
  [[nodiscard]] bool nonnegative() const { return a_l >= 0.0 && a_0 >= 0.0; }
  [[nodiscard]] RobinPair scaled(double s) const { return {s * a_l, s * a_0}; }
  [[nodiscard]] RobinPair negated() const { return {-a_l, -a_0}; }
};

enum class ErrorKind {
  InvalidArgument,
  NoConvergence,
  PoleProximity,
  ContinuationStall,
  BandViolation,
  RatioSingularity,
  DegeneratePairing,
  NotPositive,
  GridTooCoarse,
  TableTooShort,
  TruncationTooCoarse,
  NonPositiveNorm,
  LinearSolveFailure,
  DeltaOutOfRange,
  BranchJump,
  PreconditionViolated,
};

std::string_view error_name(ErrorKind kind);

/// Every failure reported by the toolkit carries a kind so callers (and the
/// CLI) can react to the category rather than parse messages.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::string_view name() const { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace dissipwave
