#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace homsum {

enum class ErrorCode {
  // kernel
  NonCanonicalTuple,
  IndexOutOfRange,
  DuplicateTuple,
  DimensionMismatch,
  ZeroKernel,
  UnsupportedFamilyParameters,
  // contraction
  RankOutOfRange,
  MaterializationTooLarge,
  OddOrder,
  // moments
  InvalidDegrees,
  NotNormalized,
  NotNormalizedToTwoNu,
  EnumerationTooLarge,
  ParameterOutOfRange,
  // bounds
  OrderMismatch,
  InvalidCovariance,
  // io / cli
  MalformedInput,
  Usage,
};

/// Coarse classes used for process exit codes.
enum class ErrorClass { Usage = 1, Validation = 2, Capacity = 3 };

std::string_view to_string(ErrorCode code) noexcept;
ErrorClass classify(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return classify(code_); }

 private:
  ErrorCode code_;
};

}  // namespace homsum
