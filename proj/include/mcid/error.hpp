#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcid {

enum class ErrorCode {
  // input / contract errors
  EmptyDataset,
  MixedCovariateDim,
  NonBinaryLabel,
  NonFiniteValue,
  BadSplitSize,
  BadWeight,
  BadParameter,
  EmptyNegativeClass,
  DimensionMismatch,
  DegenerateCovariates,
  DegenerateFold,
  ParseError,
  // numerical failures
  QuadratureFailure,
  NoBracketFound,
  RootNotBracketed,
  InnerSolverFailure,
  NonDecreasingObjective,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::MixedCovariateDim: return "MixedCovariateDim";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::BadSplitSize: return "BadSplitSize";
    case ErrorCode::BadWeight: return "BadWeight";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::EmptyNegativeClass: return "EmptyNegativeClass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateCovariates: return "DegenerateCovariates";
    case ErrorCode::DegenerateFold: return "DegenerateFold";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NoBracketFound: return "NoBracketFound";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::InnerSolverFailure: return "InnerSolverFailure";
    case ErrorCode::NonDecreasingObjective: return "NonDecreasingObjective";
  }
  return "Unknown";
}

/// True for errors caused by bad input rather than by a numerical routine.
constexpr bool is_input_error(ErrorCode code) {
  return code < ErrorCode::QuadratureFailure;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the error-code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace mcid
