#include "dissipwave/types.hpp"

namespace dissipwave {

Geometry Geometry::with_width(double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw SolverError(ErrorKind::InvalidArgument, "strip width must be positive and finite");
  }
  return Geometry{width, std::numbers::pi / width};
}

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::PoleProximity: return "PoleProximity";
    case ErrorKind::ContinuationStall: return "ContinuationStall";
    case ErrorKind::BandViolation: return "BandViolation";
    case ErrorKind::RatioSingularity: return "RatioSingularity";
    case ErrorKind::DegeneratePairing: return "DegeneratePairing";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::TableTooShort: return "TableTooShort";
    case ErrorKind::TruncationTooCoarse: return "TruncationTooCoarse";
    case ErrorKind::NonPositiveNorm: return "NonPositiveNorm";
    case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorKind::BranchJump: return "BranchJump";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
  }
  return "Unknown";
}

}  // namespace dissipwave
