#include "homsum/contraction.hpp"

#include <algorithm>
#include <bit>
#include <boost/container_hash/hash.hpp>
#include <cmath>
#include <string>
#include <tuple>
#include <unordered_map>

#include "homsum/error.hpp"
#include "homsum/numeric.hpp"

namespace homsum {

namespace {

using Tuple = std::vector<Index>;

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept { return boost::hash_range(t.begin(), t.end()); }
};

// One way of splitting a canonical entry into a contracted part `a` (size r)
// and a free part `j` (size d - r); both stay sorted.
struct Split {
  Tuple a;
  Tuple j;
  double v;
};

void check_rank(const SymmetricKernel& f, int r) {
  if (r < 0 || r > f.order()) {
    throw Error(ErrorCode::RankOutOfRange,
                "contraction rank " + std::to_string(r) + " outside [0, " + std::to_string(f.order()) + "]");
  }
}

std::vector<Split> splits(const SymmetricKernel& f, int r) {
  const int d = f.order();
  std::vector<Split> out;
  for (std::size_t k = 0; k < f.entry_count(); ++k) {
    const auto t = f.tuple(k);
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      if (std::popcount(mask) != r) continue;
      Split s{{}, {}, f.value(k)};
      for (int p = 0; p < d; ++p) ((mask >> p) & 1u ? s.a : s.j).push_back(t[p]);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::size_t dense_size(Index n, int arity, std::size_t cap) {
  std::uint64_t size = 0;
  if (!checked_pow(n, arity, size) || size > cap) {
    throw Error(ErrorCode::MaterializationTooLarge,
                "tensor of arity " + std::to_string(arity) + " over N=" + std::to_string(n) +
                    " exceeds the materialization cap of " + std::to_string(cap) + " values");
  }
  return static_cast<std::size_t>(size);
}

std::size_t flat_index(const Tuple& coords, Index n) {
  std::size_t idx = 0;
  for (Index c : coords) idx = idx * n + (c - 1);
  return idx;
}

// Number of distinct orderings of a sorted multiset.
double orbit_size(const Tuple& sorted) {
  double size = factorial(static_cast<int>(sorted.size()));
  std::size_t run = 1;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    if (k < sorted.size() && sorted[k] == sorted[k - 1]) {
      ++run;
    } else {
      size /= factorial(static_cast<int>(run));
      run = 1;
    }
  }
  return size;
}

// For each sorted multiset M of 2d - 2r coordinates, the sum of f *_r f over
// all orderings of M.
std::unordered_map<Tuple, double, TupleHash> orbit_sums(const SymmetricKernel& f, int r, std::size_t cap) {
  const int d = f.order();
  auto parts = splits(f, r);
  std::sort(parts.begin(), parts.end(), [](const Split& x, const Split& y) {
    return std::tie(x.a, x.j) < std::tie(y.a, y.j);
  });
  const double weight = factorial(r) * factorial(d - r) * factorial(d - r);
  std::unordered_map<Tuple, double, TupleHash> sums;
  Tuple key(static_cast<std::size_t>(2 * (d - r)));
  for (std::size_t lo = 0; lo < parts.size();) {
    std::size_t hi = lo;
    while (hi < parts.size() && parts[hi].a == parts[lo].a) ++hi;
    for (std::size_t p = lo; p < hi; ++p) {
      for (std::size_t q = p; q < hi; ++q) {
        std::merge(parts[p].j.begin(), parts[p].j.end(), parts[q].j.begin(), parts[q].j.end(), key.begin());
        const double mult = (p == q) ? 1.0 : 2.0;
        sums[key] += mult * weight * parts[p].v * parts[q].v;
      }
      if (sums.size() > cap) {
        throw Error(ErrorCode::MaterializationTooLarge,
                    "symmetrized contraction needs more than " + std::to_string(cap) + " orbit values");
      }
    }
    lo = hi;
  }
  return sums;
}

double symmetrized_squared_norm(const std::unordered_map<Tuple, double, TupleHash>& sums) {
  // Sort keys so the reduction order does not depend on hash layout.
  std::vector<const std::pair<const Tuple, double>*> items;
  items.reserve(sums.size());
  for (const auto& kv : sums) items.push_back(&kv);
  std::sort(items.begin(), items.end(), [](auto* x, auto* y) { return x->first < y->first; });
  CompensatedSum acc;
  for (const auto* kv : items) acc.add(kv->second * kv->second / orbit_size(kv->first));
  return acc.value();
}

}  // namespace

double ContractionTensor::at(std::span<const Index> idx) const {
  if (idx.size() != static_cast<std::size_t>(arity)) {
    throw Error(ErrorCode::DimensionMismatch, "tensor expects " + std::to_string(arity) + " coordinates");
  }
  std::size_t flat = 0;
  for (Index c : idx) {
    if (c < 1 || c > dimension) throw Error(ErrorCode::IndexOutOfRange, "tensor coordinate out of range");
    flat = flat * dimension + (c - 1);
  }
  return values[flat];
}

double ContractionTensor::frobenius_norm() const {
  CompensatedSum acc;
  for (double v : values) acc.add(v * v);
  return std::sqrt(acc.value());
}

ContractionTensor contract(const SymmetricKernel& f, int r, const ContractionOptions& opts) {
  check_rank(f, r);
  const int d = f.order();
  const Index n = f.dimension();
  ContractionTensor t;
  t.arity = 2 * (d - r);
  t.dimension = n;
  t.values.assign(dense_size(n, t.arity, opts.materialization_cap), 0.0);
  t.symmetric = t.arity <= 1;

  auto parts = splits(f, r);
  std::sort(parts.begin(), parts.end(), [](const Split& x, const Split& y) {
    return std::tie(x.a, x.j) < std::tie(y.a, y.j);
  });
  const double weight = factorial(r);  // orderings of the contracted prefix
  Tuple coords(static_cast<std::size_t>(t.arity));
  for (std::size_t lo = 0; lo < parts.size();) {
    std::size_t hi = lo;
    while (hi < parts.size() && parts[hi].a == parts[lo].a) ++hi;
    for (std::size_t p = lo; p < hi; ++p) {
      for (std::size_t q = lo; q < hi; ++q) {
        const double term = weight * parts[p].v * parts[q].v;
        Tuple left = parts[p].j;
        do {
          Tuple right = parts[q].j;
          do {
            std::copy(left.begin(), left.end(), coords.begin());
            std::copy(right.begin(), right.end(), coords.begin() + static_cast<std::ptrdiff_t>(left.size()));
            t.values[flat_index(coords, n)] += term;
          } while (std::next_permutation(right.begin(), right.end()));
        } while (std::next_permutation(left.begin(), left.end()));
      }
    }
    lo = hi;
  }
  return t;
}

double contraction_norm(const SymmetricKernel& f, int r) {
  check_rank(f, r);
  const int d = f.order();
  if (r == 0 || r == d) return f.squared_norm();

  // ||f *_r f||^2 = sum over ordered prefixes a, b of <f(a, .), f(b, .)>^2. Both
  // prefix and suffix orderings contribute constant factors, so work on sets.
  auto parts = splits(f, r);
  std::vector<Tuple> prefixes;
  prefixes.reserve(parts.size());
  for (const auto& s : parts) prefixes.push_back(s.a);
  std::sort(prefixes.begin(), prefixes.end());
  prefixes.erase(std::unique(prefixes.begin(), prefixes.end()), prefixes.end());
  auto prefix_id = [&](const Tuple& a) {
    return static_cast<std::size_t>(std::lower_bound(prefixes.begin(), prefixes.end(), a) - prefixes.begin());
  };

  // Group splits by suffix: each group lists (prefix id, value).
  std::sort(parts.begin(), parts.end(), [](const Split& x, const Split& y) {
    return std::tie(x.j, x.a) < std::tie(y.j, y.a);
  });
  std::vector<std::size_t> group_start;
  std::vector<std::pair<std::size_t, double>> members;
  members.reserve(parts.size());
  std::vector<std::vector<std::pair<std::size_t, double>>> by_prefix(prefixes.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k == 0 || parts[k].j != parts[k - 1].j) group_start.push_back(k);
    const std::size_t id = prefix_id(parts[k].a);
    members.emplace_back(id, parts[k].v);
    by_prefix[id].emplace_back(group_start.size() - 1, parts[k].v);
  }
  group_start.push_back(parts.size());

  // Row-by-row sparse Gram accumulation, never storing the full Gram matrix.
  std::vector<double> row(prefixes.size(), 0.0);
  std::vector<std::size_t> touched;
  CompensatedSum total;
  for (std::size_t a = 0; a < prefixes.size(); ++a) {
    for (const auto& [group, va] : by_prefix[a]) {
      for (std::size_t k = group_start[group]; k < group_start[group + 1]; ++k) {
        const auto [b, vb] = members[k];
        if (row[b] == 0.0) touched.push_back(b);
        row[b] += va * vb;
      }
    }
    for (std::size_t b : touched) {
      total.add(row[b] * row[b]);
      row[b] = 0.0;
    }
    touched.clear();
  }
  const double scale = factorial(r) * factorial(d - r);
  return scale * std::sqrt(total.value());
}

ContractionTensor symmetrize(const ContractionTensor& t) {
  ContractionTensor out = t;
  out.symmetric = true;
  if (t.arity <= 1) return out;
  const std::size_t n = t.dimension;
  Tuple coords(static_cast<std::size_t>(t.arity));
  for (std::size_t flat = 0; flat < t.values.size(); ++flat) {
    std::size_t rest = flat;
    for (int p = t.arity - 1; p >= 0; --p) {
      coords[static_cast<std::size_t>(p)] = static_cast<Index>(rest % n + 1);
      rest /= n;
    }
    if (!std::is_sorted(coords.begin(), coords.end())) continue;
    // coords is the sorted representative of its orbit.
    double sum = 0.0;
    std::size_t count = 0;
    Tuple perm = coords;
    do {
      sum += t.values[flat_index(perm, t.dimension)];
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double mean = sum / static_cast<double>(count);
    perm = coords;
    do {
      out.values[flat_index(perm, t.dimension)] = mean;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

double symmetrized_contraction_norm(const SymmetricKernel& f, int r, const ContractionOptions& opts) {
  check_rank(f, r);
  const int d = f.order();
  if (r == d) return f.squared_norm();
  // f *_{d-1} f(j, k) = sum_a f(a, j) f(a, k) is a symmetric matrix already.
  if (r == d - 1) return contraction_norm(f, r);
  return std::sqrt(symmetrized_squared_norm(orbit_sums(f, r, opts.materialization_cap)));
}

InfluenceProfile influence_profile(const SymmetricKernel& f) {
  // (d-1)!^{-1} times the ordered sum equals the sum over canonical tuples containing i.
  InfluenceProfile p;
  p.values.assign(f.dimension(), 0.0);
  for (std::size_t k = 0; k < f.entry_count(); ++k) {
    const double sq = f.value(k) * f.value(k);
    for (Index i : f.tuple(k)) p.values[i - 1] += sq;
  }
  CompensatedSum sum;
  for (double v : p.values) {
    p.max = std::max(p.max, v);
    sum.add(v);
  }
  p.sum = sum.value();
  return p;
}

double chi_square_constant(int d) {
  if (d < 2 || d % 2 != 0) throw Error(ErrorCode::OddOrder, "c_d requires an even order d >= 2");
  const double h = factorial(d / 2);
  const double full = factorial(d);
  return 4.0 * h * h * h / (full * full);
}

double chi_square_defect(const SymmetricKernel& f, const ContractionOptions& opts) {
  const int d = f.order();
  const double c = chi_square_constant(d);
  const auto sums = orbit_sums(f, d / 2, opts.materialization_cap);
  // ||T~ - c f||^2 = ||T~||^2 - 2c <T~, f> + c^2 ||f||^2, and <T~, f> collapses
  // to a sum over canonical entries because f lives on distinct-index orbits.
  CompensatedSum cross;
  Tuple key(static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < f.entry_count(); ++k) {
    const auto t = f.tuple(k);
    std::copy(t.begin(), t.end(), key.begin());
    if (auto it = sums.find(key); it != sums.end()) cross.add(it->second * f.value(k));
  }
  const double sq = symmetrized_squared_norm(sums) - 2.0 * c * cross.value() + c * c * f.squared_norm();
  return std::sqrt(std::max(sq, 0.0));
}

CruxGap crux_gap(const SymmetricKernel& f) {
  const int d = f.order();
  const double norm = contraction_norm(f, d - 1);
  const double inf = factorial(d - 1) * influence_profile(f).max;
  return {norm * norm, inf * inf};
}

}  // namespace homsum
