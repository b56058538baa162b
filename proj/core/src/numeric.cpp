#include "homsum/numeric.hpp"

#include <string>

#include "homsum/error.hpp"

namespace homsum {

double factorial(int n) {
  if (n < 0 || n > 2 * kMaxOrder) {
    throw Error(ErrorCode::ParameterOutOfRange, "factorial argument " + std::to_string(n));
  }
  // Values up to 24! are below 2^80; rounding recovers the exact integer for n <= 18.
  return std::round(std::exp(std::lgamma(static_cast<double>(n) + 1.0)));
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n > 2 * kMaxOrder) {
    throw Error(ErrorCode::ParameterOutOfRange, "binomial argument " + std::to_string(n));
  }
  const double log_value = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::round(std::exp(log_value));
}

double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

bool checked_pow(std::uint64_t base, int exp, std::uint64_t& out) noexcept {
  std::uint64_t result = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && result > UINT64_MAX / base) return false;
    result *= base;
  }
  out = result;
  return true;
}

}  // namespace homsum
