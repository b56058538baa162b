#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace homsum {

/// Largest order for which factorial-based constants are evaluated.
inline constexpr int kMaxOrder = 12;

/// n! in floating point via lgamma; throws ParameterOutOfRange outside [0, 2 * kMaxOrder].
double factorial(int n);

/// Binomial coefficient in floating point via lgamma (0 outside 0 <= k <= n).
double binomial(int n, int k);

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  void merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;

/// Integer power with overflow detection; returns false on overflow.
bool checked_pow(std::uint64_t base, int exp, std::uint64_t& out) noexcept;

}  // namespace homsum
