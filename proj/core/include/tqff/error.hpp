#pragma once

#include <stdexcept>
#include <string>

namespace tqff {

enum class ErrorCode {
  InvalidL,
  InvalidInterval,
  NonPositiveMoment,
  DiscretizationUnstable,
  EigenFailure,
  AbscissaOutOfRange,
  AsymmetricRule,
  OddRule,
  DimensionMismatch,
  NodeAtZero,
  UnsupportedFamily,
  SeedRequired,
  CholeskyFailure,
  CapExceeded,
  NonFiniteLoss,
  LengthMismatch,
  MaxSubdivision,
  NonFinite,
  ParseError,
  EmptyData,
  InvalidArgument,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// True for failures caused by floating-point breakdown rather than bad input.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tqff
