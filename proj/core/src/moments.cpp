#include "homsum/moments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <span>
#include <string>

#include "homsum/error.hpp"
#include "homsum/numeric.hpp"

namespace homsum {

double hermite(int q, double x) {
  if (q < 0) throw Error(ErrorCode::ParameterOutOfRange, "Hermite degree must be nonnegative");
  if (q == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < q; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

ChiSquareMoments chi_square_moments(int nu) {
  if (nu < 1) throw Error(ErrorCode::InvalidDegrees, "degrees of freedom must be >= 1");
  const double v = nu;
  return {2.0 * v, 8.0 * v, 12.0 * v * v + 48.0 * v};
}

double gaussian_second_moment(const SymmetricKernel& f) { return factorial(f.order()) * f.squared_norm(); }

double gaussian_cross_moment(const SymmetricKernel& f, const SymmetricKernel& g) {
  if (f.order() != g.order()) return 0.0;
  // Merge the two sorted canonical tables.
  CompensatedSum acc;
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < f.entry_count() && b < g.entry_count()) {
    const auto ta = f.tuple(a);
    const auto tb = g.tuple(b);
    if (std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end())) {
      ++a;
    } else if (std::lexicographical_compare(tb.begin(), tb.end(), ta.begin(), ta.end())) {
      ++b;
    } else {
      acc.add(f.value(a++) * g.value(b++));
    }
  }
  const double df = factorial(f.order());
  return df * df * acc.value();
}

double gaussian_fourth_cumulant(const SymmetricKernel& f, const ContractionOptions& opts) {
  const int d = f.order();
  CompensatedSum acc;
  for (int r = 1; r <= d - 1; ++r) {
    const double norm = symmetrized_contraction_norm(f, r, opts);
    const double b1 = binomial(d, r);
    const double b2 = binomial(d - 1, r - 1);
    acc.add(factorial(r) * factorial(r - 1) * b1 * b1 * b2 * b2 * factorial(2 * d - 2 * r) * norm * norm);
  }
  return 3.0 * d * acc.value();
}

double gaussian_fourth_moment(const SymmetricKernel& f, const ContractionOptions& opts) {
  const double variance = gaussian_second_moment(f);
  if (std::fabs(variance - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorCode::NotNormalized, "fourth-moment identity needs d!||f||^2 = 1, got " + std::to_string(variance));
  }
  return 3.0 + gaussian_fourth_cumulant(f, opts);
}

double gaussian_third_moment(const SymmetricKernel& f) {
  const int d = f.order();
  if (d % 2 != 0 || f.empty()) return 0.0;
  const int h = d / 2;
  const auto hs = static_cast<std::size_t>(h);
  // One record (A, B, v) per split of a canonical entry into sorted halves.
  struct Split {
    std::size_t first;   // offset of A in `halves`
    std::size_t second;  // offset of B
    double value;
  };
  std::vector<Index> halves;
  std::vector<Split> splits;
  std::vector<int> pick(static_cast<std::size_t>(d), 0);
  std::fill(pick.begin() + h, pick.end(), 1);
  for (std::size_t k = 0; k < f.entry_count(); ++k) {
    const auto t = f.tuple(k);
    std::vector<int> mask = pick;
    do {
      const std::size_t a = halves.size();
      for (int j = 0; j < d; ++j) {
        if (mask[static_cast<std::size_t>(j)] == 0) halves.push_back(t[static_cast<std::size_t>(j)]);
      }
      const std::size_t b = halves.size();
      for (int j = 0; j < d; ++j) {
        if (mask[static_cast<std::size_t>(j)] == 1) halves.push_back(t[static_cast<std::size_t>(j)]);
      }
      splits.push_back({a, b, f.value(k)});
    } while (std::next_permutation(mask.begin(), mask.end()));
  }
  auto half = [&](std::size_t off) { return std::span<const Index>(halves.data() + off, hs); };
  auto less = [&](std::size_t x, std::size_t y) {
    const auto u = half(x);
    const auto v = half(y);
    return std::lexicographical_compare(u.begin(), u.end(), v.begin(), v.end());
  };
  std::sort(splits.begin(), splits.end(), [&](const Split& x, const Split& y) {
    if (less(x.first, y.first)) return true;
    if (less(y.first, x.first)) return false;
    return less(x.second, y.second);
  });
  // sum over sets A, B, C of g(A u B) g(B u C) g(C u A)
  CompensatedSum acc;
  std::vector<Index> joined(static_cast<std::size_t>(d));
  for (const auto& ab : splits) {
    auto lo = std::partition_point(splits.begin(), splits.end(), [&](const Split& s) { return less(s.first, ab.second); });
    for (auto it = lo; it != splits.end() && !less(ab.second, it->first); ++it) {
      const auto a = half(ab.first);
      const auto c = half(it->second);
      std::copy(a.begin(), a.end(), joined.begin());
      std::copy(c.begin(), c.end(), joined.begin() + h);
      const double v3 = f.evaluate(joined);
      if (v3 != 0.0) acc.add(ab.value * it->value * v3);
    }
  }
  const double hf = factorial(h);
  const double b = binomial(d, h);
  return factorial(d) * hf * b * b * hf * hf * hf * acc.value();
}

ExactDistribution::ExactDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end());
}

double ExactDistribution::moment(int k) const {
  CompensatedSum acc;
  for (const auto& [x, p] : atoms_) acc.add(p * std::pow(x, k));
  return acc.value();
}

double ExactDistribution::abs_moment(double q) const {
  CompensatedSum acc;
  for (const auto& [x, p] : atoms_) acc.add(p * std::pow(std::fabs(x), q));
  return acc.value();
}

double ExactDistribution::cdf(double x) const {
  CompensatedSum acc;
  for (const auto& [v, p] : atoms_) {
    if (v > x) break;
    acc.add(p);
  }
  return acc.value();
}

ExactDistribution exact_rademacher_distribution(const SymmetricKernel& f) {
  const int d = f.order();
  // Relabel the indices that occur in some entry as 0..K-1.
  std::vector<Index> active;
  for (std::size_t k = 0; k < f.entry_count(); ++k) {
    for (Index i : f.tuple(k)) active.push_back(i);
  }
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  const int vars = static_cast<int>(active.size());
  if (vars > kMaxEnumerationVariables) {
    throw Error(ErrorCode::EnumerationTooLarge, "exact enumeration over " + std::to_string(vars) +
                                                    " active variables exceeds the limit of " +
                                                    std::to_string(kMaxEnumerationVariables));
  }
  if (vars == 0) return ExactDistribution({{0.0, 1.0}});

  const std::size_t entries = f.entry_count();
  std::vector<std::uint32_t> local(entries * static_cast<std::size_t>(d));
  std::vector<std::vector<std::size_t>> touching(static_cast<std::size_t>(vars));
  for (std::size_t k = 0; k < entries; ++k) {
    const auto t = f.tuple(k);
    for (int p = 0; p < d; ++p) {
      const auto id = static_cast<std::uint32_t>(std::lower_bound(active.begin(), active.end(), t[p]) - active.begin());
      local[k * d + p] = id;
      touching[id].push_back(k);
    }
  }
  const double scale = factorial(d);
  std::vector<double> x(static_cast<std::size_t>(vars), 1.0);
  auto term = [&](std::size_t k) {
    double v = f.value(k);
    for (int p = 0; p < d; ++p) v *= x[local[k * d + p]];
    return v;
  };
  auto full_sum = [&] {
    double s = 0.0;
    for (std::size_t k = 0; k < entries; ++k) s += term(k);
    return scale * s;
  };

  // Gray-code walk; each step flips one sign and updates Q by the terms that
  // contain it. Q is recomputed from scratch periodically to bound drift.
  constexpr std::uint64_t kRefresh = 256;
  const std::uint64_t total = std::uint64_t{1} << vars;
  std::vector<double> values(total);
  double q = full_sum();
  values[0] = q;
  for (std::uint64_t step = 1; step < total; ++step) {
    const int bit = std::countr_zero(step);
    double delta = 0.0;
    for (std::size_t k : touching[static_cast<std::size_t>(bit)]) delta += term(k);
    x[static_cast<std::size_t>(bit)] = -x[static_cast<std::size_t>(bit)];
    if (step % kRefresh == 0) {
      q = full_sum();
    } else {
      q -= 2.0 * scale * delta;
    }
    values[step] = q;
  }

  std::sort(values.begin(), values.end());
  double magnitude = 0.0;
  for (double v : values) magnitude = std::max(magnitude, std::fabs(v));
  const double tol = 1e-12 * std::max(magnitude, 1e-300);
  const double unit = std::ldexp(1.0, -vars);
  std::vector<ExactDistribution::Atom> atoms;
  for (std::size_t lo = 0; lo < values.size();) {
    std::size_t hi = lo;
    CompensatedSum cluster;
    while (hi < values.size() && values[hi] - values[lo] <= tol) cluster.add(values[hi++]);
    const double count = static_cast<double>(hi - lo);
    atoms.emplace_back(cluster.value() / count, count * unit);
    lo = hi;
  }
  return ExactDistribution(std::move(atoms));
}

namespace {

void check_moment_order(double q) {
  if (!(q >= 2.0)) throw Error(ErrorCode::ParameterOutOfRange, "hypercontractivity needs q >= 2");
}

HypercontractivityResult compare(double moment_q, double bound, double moment_error) {
  return {moment_q <= bound + moment_error, bound, bound - moment_q};
}

}  // namespace

HypercontractivityResult hypercontractivity_check(double moment_q, double moment_2, double q, int d, double gamma,
                                                  double moment_error) {
  check_moment_order(q);
  const double bound = std::pow(gamma, d) * std::pow(2.0 * std::sqrt(q - 1.0), q * d) * std::pow(moment_2, q / 2.0);
  return compare(moment_q, bound, moment_error);
}

HypercontractivityResult gaussian_hypercontractivity_check(double moment_q, double moment_2, double q, int d,
                                                           double moment_error) {
  check_moment_order(q);
  const double bound = std::pow(q - 1.0, q * d / 2.0) * std::pow(moment_2, q / 2.0);
  return compare(moment_q, bound, moment_error);
}

double moment_transfer_constant(int d, int l, int m, double alpha) {
  return std::pow(2.0, l + 1) / factorial(d - 1) * std::pow(alpha, static_cast<double>(d) * l / m) *
         std::pow(2.0 * std::sqrt(l - 1.0), (2.0 * d - 1.0) * l) * std::pow(factorial(d), l - 1);
}

double moment_transfer_bound(int d, int l, int m, double alpha, double second_moment_root_bound,
                             double max_influence) {
  constexpr int k = 2;
  if (d < 1 || m <= k || l <= k || l > m) {
    throw Error(ErrorCode::ParameterOutOfRange, "moment transfer needs d >= 1, m > 2 and l in {3, ..., m}");
  }
  if (!(alpha >= 1.0) || !(second_moment_root_bound >= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "moment transfer needs alpha >= 1 and M >= 1");
  }
  if (!(max_influence >= 0.0 && max_influence <= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "max influence must lie in [0, 1]");
  }
  const double inf_factor =
      std::max(std::pow(max_influence, (k - 1) / 2.0), std::pow(max_influence, l / 2.0 - 1.0));
  return moment_transfer_constant(d, l, m, alpha) * std::pow(second_moment_root_bound, l - k + 1) * inf_factor;
}

}  // namespace homsum
