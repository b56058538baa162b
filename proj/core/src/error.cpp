#include "homsum/error.hpp"

namespace homsum {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonCanonicalTuple: return "NonCanonicalTuple";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DuplicateTuple: return "DuplicateTuple";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroKernel: return "ZeroKernel";
    case ErrorCode::UnsupportedFamilyParameters: return "UnsupportedFamilyParameters";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::MaterializationTooLarge: return "MaterializationTooLarge";
    case ErrorCode::OddOrder: return "OddOrder";
    case ErrorCode::InvalidDegrees: return "InvalidDegrees";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NotNormalizedToTwoNu: return "NotNormalizedToTwoNu";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::InvalidCovariance: return "InvalidCovariance";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MaterializationTooLarge:
    case ErrorCode::EnumerationTooLarge:
      return ErrorClass::Capacity;
    case ErrorCode::Usage:
      return ErrorClass::Usage;
    default:
      return ErrorClass::Validation;
  }
}

}  // namespace homsum
