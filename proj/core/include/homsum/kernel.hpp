#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace homsum {

/// 1-based variable index in [N].
using Index = std::uint32_t;

/// A canonical (strictly increasing) index tuple with its coefficient.
struct KernelEntry {
  std::vector<Index> tuple;
  double value = 0.0;
};

/// Symmetric coefficient function f: [N]^d -> R vanishing on diagonals.
///
/// Only strictly increasing tuples with nonzero coefficients are stored; the
/// value on any permutation of a stored tuple is implied, and any tuple with a
/// repeated index evaluates to zero. Instances are immutable after construction.
class SymmetricKernel {
 public:
  SymmetricKernel(int order, Index dimension);

  /// Validates and canonicalizes: tuples must be strictly increasing, within
  /// [1, N], and unique. Exact zero coefficients are dropped.
  static SymmetricKernel from_entries(int order, Index dimension, std::vector<KernelEntry> entries);

  int order() const noexcept { return order_; }
  Index dimension() const noexcept { return dimension_; }
  std::size_t entry_count() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  /// Canonical tuple of entry `k`, in lexicographic order of entries.
  std::span<const Index> tuple(std::size_t k) const noexcept {
    return {indices_.data() + k * static_cast<std::size_t>(order_), static_cast<std::size_t>(order_)};
  }
  double value(std::size_t k) const noexcept { return values_[k]; }
  std::span<const double> values() const noexcept { return values_; }

  /// f(idx) for an arbitrary (not necessarily sorted) d-tuple.
  double evaluate(std::span<const Index> idx) const;

  /// ||f||_d^2 summed over all ordered tuples (= d! times the canonical sum).
  double squared_norm() const;

  /// Q_d(N, f, x) = d! * sum over canonical tuples of f * prod x.
  double evaluate_sum(std::span<const double> x) const;

  /// Returns lambda * f.
  SymmetricKernel scaled(double lambda) const;

  /// Moves every index by `offset`, embedding into [new_dimension].
  SymmetricKernel shifted(Index offset, Index new_dimension) const;

  friend bool operator==(const SymmetricKernel&, const SymmetricKernel&) = default;

 private:
  int order_;
  Index dimension_;
  std::vector<Index> indices_;  // entry_count * order, row-major
  std::vector<double> values_;
};

SymmetricKernel make_kernel(int order, Index dimension, std::vector<KernelEntry> entries);

/// g = lambda f with d! ||g||^2 = target_variance.
SymmetricKernel normalize_to_variance(const SymmetricKernel& f, double target_variance);

enum class KernelFamily { SinglePair, Constant, DisjointPairs, Walsh, RandomSparse };

std::string_view to_string(KernelFamily family) noexcept;
std::optional<KernelFamily> parse_kernel_family(std::string_view name) noexcept;

struct KernelFamilySpec {
  KernelFamily family = KernelFamily::SinglePair;
  int order = 2;
  /// N for constant/walsh/random_sparse, m for disjoint_pairs; unused for single_pair.
  std::uint64_t size = 2;
  double target_variance = 1.0;
  std::uint64_t seed = 0;
  /// Fraction of canonical tuples kept by random_sparse.
  double density = 0.5;
};

SymmetricKernel generate_family(const KernelFamilySpec& spec);

}  // namespace homsum
