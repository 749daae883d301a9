#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scorekit {

enum class ErrorCode {
  InvalidArgument,
  UnknownFamily,
  InvalidParameter,
  OutOfSupport,
  NonDifferentiablePoint,
  NotIntegrable,
  NonConvergence,
  NonFinite,
  InvalidBracket,
  NotSymmetric,
  EmptySample,
  HeavyTail,
  NotStrictlyLogConcave,
  NotLogConcave,
  NormalizationFailure,
  DegenerateBase,
  ParityViolation,
  NoCrossing,
  NotMonotone,
  InvalidOperator,
  BoundaryViolation,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for failures of a numerical routine (as opposed to bad input).
/// The CLI maps these to exit code 2.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace scorekit
