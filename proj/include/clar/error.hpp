#pragma once

#include <stdexcept>
#include <string>

namespace clar {

enum class ErrorCode {
  OutOfRange,
  SelfLoop,
  EmptyEdgeSet,
  NonSymmetric,
  DimensionMismatch,
  EmptySelection,
  EmptyMask,
  NonFiniteLoss,
  NonFiniteGrad,
  NotAComplement,
  InsufficientNodes,
  InfeasibleSpec,
  ParseError,
  RowCountMismatch,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorCode code);

// Numerical failures map to exit code 3 in the CLI, everything else to 2.
constexpr bool is_numerical(ErrorCode code) {
  return code == ErrorCode::NonFiniteLoss || code == ErrorCode::NonFiniteGrad;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace clar
