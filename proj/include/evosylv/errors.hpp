#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evosylv {

enum class ErrorCode {
  NonDiagonalizable,
  SingularMatrix,
  UnsupportedDimension,
  NonSeparableWind,
  MissingInitialValues,
  UnsupportedOrder,
  TooFewSteps,
  SingularOperator,
  ShiftSingular,
  SingularProjectedMatrix,
  EigFallback,
  ResonantEigenvalue,
  NotSeparable,
  IndexOutOfRange,
  TooLarge,
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI, the solver's inner-solve dispatch) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonDiagonalizable: return "NonDiagonalizable";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::NonSeparableWind: return "NonSeparableWind";
    case ErrorCode::MissingInitialValues: return "MissingInitialValues";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::TooFewSteps: return "TooFewSteps";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::ShiftSingular: return "ShiftSingular";
    case ErrorCode::SingularProjectedMatrix: return "SingularProjectedMatrix";
    case ErrorCode::EigFallback: return "EigFallback";
    case ErrorCode::ResonantEigenvalue: return "ResonantEigenvalue";
    case ErrorCode::NotSeparable: return "NotSeparable";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace evosylv
