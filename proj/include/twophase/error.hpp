#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twophase {

enum class ErrorCode {
  TemperatureOutOfRange,
  NoZeroFound,
  MultipleZeros,
  EmptyPhase,
  DegenerateConfiguration,
  NoRootInRange,
  SingularSystem,
  QuadratureFailure,
  GridMismatch,
  SolveFailure,
  EigensolveFailure,
  GammaZero,
  NotPSD,
  RangeExit,
  StepFailure,
  DropletCollapse,
  InvalidArgument,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TemperatureOutOfRange: return "TemperatureOutOfRange";
    case ErrorCode::NoZeroFound: return "NoZeroFound";
    case ErrorCode::MultipleZeros: return "MultipleZeros";
    case ErrorCode::EmptyPhase: return "EmptyPhase";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoRootInRange: return "NoRootInRange";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::GammaZero: return "GammaZero";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::RangeExit: return "RangeExit";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::DropletCollapse: return "DropletCollapse";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every numerical failure in the library is reported as an Error carrying a code,
/// so callers (the CLI in particular) can map failures without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace twophase
