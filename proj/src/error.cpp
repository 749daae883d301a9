#include "scorekit/error.hpp"

namespace scorekit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::NonDifferentiablePoint: return "NonDifferentiablePoint";
    case ErrorCode::NotIntegrable: return "NotIntegrable";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidBracket: return "InvalidBracket";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::HeavyTail: return "HeavyTail";
    case ErrorCode::NotStrictlyLogConcave: return "NotStrictlyLogConcave";
    case ErrorCode::NotLogConcave: return "NotLogConcave";
    case ErrorCode::NormalizationFailure: return "NormalizationFailure";
    case ErrorCode::DegenerateBase: return "DegenerateBase";
    case ErrorCode::ParityViolation: return "ParityViolation";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::NotMonotone: return "NotMonotone";
    case ErrorCode::InvalidOperator: return "InvalidOperator";
    case ErrorCode::BoundaryViolation: return "BoundaryViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::NonFinite:
    case ErrorCode::NormalizationFailure:
    case ErrorCode::DegenerateBase:
      return true;
    default:
      return false;
  }
}

}  // namespace scorekit
