#include "homsum/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "homsum/error.hpp"
#include "homsum/numeric.hpp"
#include "homsum/philox.hpp"

namespace homsum {

namespace {

std::string tuple_text(std::span<const Index> t) {
  std::string s = "(";
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(t[k]);
  }
  return s + ")";
}

void check_shape(int order, Index dimension) {
  if (order < 1 || order > kMaxOrder) {
    throw Error(ErrorCode::UnsupportedFamilyParameters,
                "order must lie in [1, " + std::to_string(kMaxOrder) + "], got " + std::to_string(order));
  }
  if (dimension < static_cast<Index>(order)) {
    throw Error(ErrorCode::IndexOutOfRange, "dimension N=" + std::to_string(dimension) +
                                                " is smaller than the order d=" + std::to_string(order));
  }
}

}  // namespace

SymmetricKernel::SymmetricKernel(int order, Index dimension) : order_(order), dimension_(dimension) {
  check_shape(order, dimension);
}

SymmetricKernel SymmetricKernel::from_entries(int order, Index dimension, std::vector<KernelEntry> entries) {
  SymmetricKernel f(order, dimension);
  for (const auto& e : entries) {
    if (e.tuple.size() != static_cast<std::size_t>(order)) {
      throw Error(ErrorCode::DimensionMismatch, "tuple " + tuple_text(e.tuple) + " has length " +
                                                    std::to_string(e.tuple.size()) + ", expected " +
                                                    std::to_string(order));
    }
    for (Index i : e.tuple) {
      if (i < 1 || i > dimension) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "tuple " + tuple_text(e.tuple) + " leaves [1, " + std::to_string(dimension) + "]");
      }
    }
    for (std::size_t k = 1; k < e.tuple.size(); ++k) {
      if (e.tuple[k - 1] >= e.tuple[k]) {
        throw Error(ErrorCode::NonCanonicalTuple, "tuple " + tuple_text(e.tuple) + " is not strictly increasing");
      }
    }
    if (!std::isfinite(e.value)) {
      throw Error(ErrorCode::MalformedInput, "non-finite coefficient at " + tuple_text(e.tuple));
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const KernelEntry& a, const KernelEntry& b) { return a.tuple < b.tuple; });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k - 1].tuple == entries[k].tuple) {
      throw Error(ErrorCode::DuplicateTuple, "tuple " + tuple_text(entries[k].tuple) + " appears twice");
    }
  }
  f.indices_.reserve(entries.size() * static_cast<std::size_t>(order));
  f.values_.reserve(entries.size());
  for (auto& e : entries) {
    if (e.value == 0.0) continue;
    f.indices_.insert(f.indices_.end(), e.tuple.begin(), e.tuple.end());
    f.values_.push_back(e.value);
  }
  return f;
}

double SymmetricKernel::evaluate(std::span<const Index> idx) const {
  if (idx.size() != static_cast<std::size_t>(order_)) {
    throw Error(ErrorCode::DimensionMismatch, "evaluate expects " + std::to_string(order_) + " indices");
  }
  std::vector<Index> key(idx.begin(), idx.end());
  for (Index i : key) {
    if (i < 1 || i > dimension_) {
      throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i) + " outside [1, " +
                                                  std::to_string(dimension_) + "]");
    }
  }
  std::sort(key.begin(), key.end());
  if (std::adjacent_find(key.begin(), key.end()) != key.end()) return 0.0;

  // Binary search over the lexicographically sorted entry table.
  std::size_t lo = 0;
  std::size_t hi = entry_count();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto t = tuple(mid);
    if (std::lexicographical_compare(t.begin(), t.end(), key.begin(), key.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < entry_count() && std::equal(key.begin(), key.end(), tuple(lo).begin())) return values_[lo];
  return 0.0;
}

double SymmetricKernel::squared_norm() const {
  CompensatedSum acc;
  for (double v : values_) acc.add(v * v);
  return factorial(order_) * acc.value();
}

double SymmetricKernel::evaluate_sum(std::span<const double> x) const {
  if (x.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch,
                "input length " + std::to_string(x.size()) + " differs from N=" + std::to_string(dimension_));
  }
  double acc = 0.0;
  const std::size_t d = static_cast<std::size_t>(order_);
  const Index* idx = indices_.data();
  for (std::size_t k = 0; k < values_.size(); ++k, idx += d) {
    double term = values_[k];
    for (std::size_t j = 0; j < d; ++j) term *= x[idx[j] - 1];
    acc += term;
  }
  return factorial(order_) * acc;
}

SymmetricKernel SymmetricKernel::scaled(double lambda) const {
  SymmetricKernel g(order_, dimension_);
  if (lambda == 0.0) return g;
  g.indices_ = indices_;
  g.values_ = values_;
  for (double& v : g.values_) v *= lambda;
  return g;
}

SymmetricKernel SymmetricKernel::shifted(Index offset, Index new_dimension) const {
  if (static_cast<std::uint64_t>(dimension_) + offset > new_dimension) {
    throw Error(ErrorCode::IndexOutOfRange, "shift by " + std::to_string(offset) + " exceeds N=" +
                                                std::to_string(new_dimension));
  }
  SymmetricKernel g(order_, new_dimension);
  g.indices_ = indices_;
  for (Index& i : g.indices_) i += offset;
  g.values_ = values_;
  return g;
}

SymmetricKernel make_kernel(int order, Index dimension, std::vector<KernelEntry> entries) {
  return SymmetricKernel::from_entries(order, dimension, std::move(entries));
}

SymmetricKernel normalize_to_variance(const SymmetricKernel& f, double target_variance) {
  if (!(target_variance > 0.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "target variance must be positive");
  }
  const double current = f.squared_norm() * factorial(f.order());
  if (!(current > 0.0)) throw Error(ErrorCode::ZeroKernel, "cannot normalize the zero kernel");
  return f.scaled(std::sqrt(target_variance / current));
}

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::SinglePair: return "single_pair";
    case KernelFamily::Constant: return "constant";
    case KernelFamily::DisjointPairs: return "disjoint_pairs";
    case KernelFamily::Walsh: return "walsh";
    case KernelFamily::RandomSparse: return "random_sparse";
  }
  return "unknown";
}

std::optional<KernelFamily> parse_kernel_family(std::string_view name) noexcept {
  for (auto family : {KernelFamily::SinglePair, KernelFamily::Constant, KernelFamily::DisjointPairs,
                      KernelFamily::Walsh, KernelFamily::RandomSparse}) {
    if (to_string(family) == name) return family;
  }
  return std::nullopt;
}

namespace {

constexpr std::uint64_t kMaxFamilyDimension = 1u << 26;
constexpr double kMaxRandomCandidates = 5e6;

Index checked_dimension(std::uint64_t n) {
  if (n > kMaxFamilyDimension) {
    throw Error(ErrorCode::UnsupportedFamilyParameters, "dimension " + std::to_string(n) + " too large");
  }
  return static_cast<Index>(n);
}

// Advances `t` to the next strictly increasing tuple in [1, N]^d; false when exhausted.
bool next_combination(std::vector<Index>& t, Index n) {
  const int d = static_cast<int>(t.size());
  int k = d - 1;
  while (k >= 0 && t[k] == n - static_cast<Index>(d - 1 - k)) --k;
  if (k < 0) return false;
  ++t[k];
  for (int j = k + 1; j < d; ++j) t[j] = t[j - 1] + 1;
  return true;
}

SymmetricKernel constant_kernel(Index n) {
  std::vector<KernelEntry> entries;
  entries.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Index i = 1; i <= n; ++i) {
    for (Index j = i + 1; j <= n; ++j) entries.push_back({{i, j}, 1.0});
  }
  return make_kernel(2, n, std::move(entries));
}

SymmetricKernel disjoint_pairs_kernel(std::uint64_t m) {
  const Index n = checked_dimension(2 * m);
  std::vector<KernelEntry> entries;
  entries.reserve(m);
  const double value = 1.0 / (2.0 * std::sqrt(static_cast<double>(m)));
  for (Index k = 1; k <= m; ++k) entries.push_back({{2 * k - 1, 2 * k}, value});
  return make_kernel(2, n, std::move(entries));
}

SymmetricKernel walsh_kernel(int d, Index n) {
  const double value = 1.0 / (factorial(d) * std::sqrt(static_cast<double>(n - d + 1)));
  std::vector<KernelEntry> entries;
  entries.reserve(n - d + 1);
  std::vector<Index> head(static_cast<std::size_t>(d - 1));
  std::iota(head.begin(), head.end(), Index{1});
  for (Index i = static_cast<Index>(d); i <= n; ++i) {
    auto t = head;
    t.push_back(i);
    entries.push_back({std::move(t), value});
  }
  return make_kernel(d, n, std::move(entries));
}

SymmetricKernel random_sparse_kernel(int d, Index n, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) {
    throw Error(ErrorCode::UnsupportedFamilyParameters, "random_sparse density must lie in (0, 1]");
  }
  double candidates = 1.0;
  for (int k = 0; k < d; ++k) candidates *= static_cast<double>(n - k) / (k + 1);
  if (candidates > kMaxRandomCandidates) {
    throw Error(ErrorCode::UnsupportedFamilyParameters, "random_sparse enumerates C(N,d) tuples; too many");
  }
  CounterStream rng(seed, 0);
  std::vector<KernelEntry> entries;
  std::vector<Index> t(static_cast<std::size_t>(d));
  std::iota(t.begin(), t.end(), Index{1});
  do {
    const bool keep = rng.next_open01() < density;
    const double value = rng.next_normal();
    if (keep && value != 0.0) entries.push_back({t, value});
  } while (next_combination(t, n));
  if (entries.empty()) {
    std::iota(t.begin(), t.end(), Index{1});
    entries.push_back({t, 1.0});
  }
  return make_kernel(d, n, std::move(entries));
}

}  // namespace

SymmetricKernel generate_family(const KernelFamilySpec& spec) {
  const int d = spec.order;
  if (!(spec.target_variance > 0.0)) {
    throw Error(ErrorCode::UnsupportedFamilyParameters, "target variance must be positive");
  }
  SymmetricKernel raw(2, 2);
  switch (spec.family) {
    case KernelFamily::SinglePair:
      if (d != 2) throw Error(ErrorCode::UnsupportedFamilyParameters, "single_pair requires d = 2");
      raw = make_kernel(2, 2, {{{1, 2}, 0.5}});
      break;
    case KernelFamily::Constant:
      if (d != 2) throw Error(ErrorCode::UnsupportedFamilyParameters, "constant requires d = 2");
      if (spec.size < 2) throw Error(ErrorCode::UnsupportedFamilyParameters, "constant requires N >= 2");
      raw = constant_kernel(checked_dimension(spec.size));
      break;
    case KernelFamily::DisjointPairs:
      if (d != 2) throw Error(ErrorCode::UnsupportedFamilyParameters, "disjoint_pairs requires d = 2");
      if (spec.size < 1) throw Error(ErrorCode::UnsupportedFamilyParameters, "disjoint_pairs requires m >= 1");
      raw = disjoint_pairs_kernel(spec.size);
      break;
    case KernelFamily::Walsh:
      if (d < 2 || d > kMaxOrder) throw Error(ErrorCode::UnsupportedFamilyParameters, "walsh requires 2 <= d <= 12");
      if (spec.size <= static_cast<std::uint64_t>(d)) {
        throw Error(ErrorCode::UnsupportedFamilyParameters, "walsh requires N > d");
      }
      raw = walsh_kernel(d, checked_dimension(spec.size));
      break;
    case KernelFamily::RandomSparse:
      if (d < 1 || d > kMaxOrder || spec.size < static_cast<std::uint64_t>(d)) {
        throw Error(ErrorCode::UnsupportedFamilyParameters, "random_sparse requires 1 <= d <= N");
      }
      raw = random_sparse_kernel(d, checked_dimension(spec.size), spec.density, spec.seed);
      break;
  }
  return normalize_to_variance(raw, spec.target_variance);
}

}  // namespace homsum
