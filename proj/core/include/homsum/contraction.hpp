#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "homsum/kernel.hpp"

namespace homsum {

/// Default cap on the number of values a materialized tensor may hold.
inline constexpr std::size_t kDefaultMaterializationCap = 10'000'000;

struct ContractionOptions {
  /// Upper bound on dense tensor size (contract/symmetrize) and on the number of
  /// distinct coordinate multisets tracked by the sparse symmetrized path.
  std::size_t materialization_cap = kDefaultMaterializationCap;
};

/// Dense function on [N]^arity, row-major with the first coordinate most
/// significant. Arity 0 holds a single scalar.
struct ContractionTensor {
  int arity = 0;
  Index dimension = 0;
  std::vector<double> values;
  bool symmetric = false;

  /// Value at 1-based coordinates.
  double at(std::span<const Index> idx) const;
  double frobenius_norm() const;
};

/// Dense f *_r f on [N]^{2d-2r}; r = d yields the scalar ||f||^2.
ContractionTensor contract(const SymmetricKernel& f, int r, const ContractionOptions& opts = {});

/// ||f *_r f|| without materializing the tensor (Gram identity over r-prefixes).
/// r = 0 and r = d both return ||f||^2.
double contraction_norm(const SymmetricKernel& f, int r);

/// Average of T over all permutations of its coordinates.
ContractionTensor symmetrize(const ContractionTensor& t);

/// ||symmetrization of f *_r f||. Uses the Gram path when the contraction is
/// already symmetric (r = d - 1) and a sparse orbit accumulation otherwise.
/// Throws MaterializationTooLarge when the orbit table would exceed the cap.
double symmetrized_contraction_norm(const SymmetricKernel& f, int r, const ContractionOptions& opts = {});

struct InfluenceProfile {
  std::vector<double> values;  // values[i - 1] = Inf_i(f)
  double max = 0.0;
  double sum = 0.0;
};

InfluenceProfile influence_profile(const SymmetricKernel& f);

/// c_d = 4 (d/2)!^3 / d!^2 for even d.
double chi_square_constant(int d);

/// ||symmetrized f *_{d/2} f - c_d f||_d summed over all ordered d-tuples.
double chi_square_defect(const SymmetricKernel& f, const ContractionOptions& opts = {});

struct CruxGap {
  double contraction_sq = 0.0;  // ||f *_{d-1} f||^2
  double influence_sq = 0.0;    // ((d-1)! max Inf)^2
};

CruxGap crux_gap(const SymmetricKernel& f);

}  // namespace homsum
