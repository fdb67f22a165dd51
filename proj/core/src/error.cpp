#include "tqff/error.hpp"

namespace tqff {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidL: return "InvalidL";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::NonPositiveMoment: return "NonPositiveMoment";
    case ErrorCode::DiscretizationUnstable: return "DiscretizationUnstable";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::AbscissaOutOfRange: return "AbscissaOutOfRange";
    case ErrorCode::AsymmetricRule: return "AsymmetricRule";
    case ErrorCode::OddRule: return "OddRule";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NodeAtZero: return "NodeAtZero";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::SeedRequired: return "SeedRequired";
    case ErrorCode::CholeskyFailure: return "CholeskyFailure";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MaxSubdivision: return "MaxSubdivision";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveMoment:
    case ErrorCode::DiscretizationUnstable:
    case ErrorCode::EigenFailure:
    case ErrorCode::AbscissaOutOfRange:
    case ErrorCode::CholeskyFailure:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::MaxSubdivision:
    case ErrorCode::NonFinite:
      return true;
    default:
      return false;
  }
}

}  // namespace tqff
