#include <doctest.h>

#include <cmath>
#include <random>

#include "homsum/contraction.hpp"
#include "homsum/error.hpp"
#include "oracles/brute_force.hpp"
#include "support/random_kernels.hpp"

using namespace homsum;

namespace {

SymmetricKernel p2() { return make_kernel(2, 2, {{{1, 2}, 0.5}}); }

SymmetricKernel family(KernelFamily fam, std::uint64_t size, double var = 1.0) {
  KernelFamilySpec spec;
  spec.family = fam;
  spec.size = size;
  spec.target_variance = var;
  return generate_family(spec);
}

}  // namespace

TEST_CASE("contract closed forms") {
  const auto t = contract(p2(), 1);
  CHECK(t.arity == 2);
  CHECK(t.values == std::vector<double>{0.25, 0.0, 0.0, 0.25});

  const auto c = contract(family(KernelFamily::Constant, 3), 1);
  for (Index j = 1; j <= 3; ++j) {
    for (Index k = 1; k <= 3; ++k) {
      CHECK(c.at(std::vector<Index>{j, k}) == doctest::Approx(j == k ? 1.0 / 6.0 : 1.0 / 12.0));
    }
  }

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = testing::random_kernel(rng, {1, 3, 5});
    const auto full = contract(f, f.order());
    CHECK(full.arity == 0);
    CHECK(full.values.at(0) == doctest::Approx(f.squared_norm()).epsilon(1e-13));
  }
  CHECK_THROWS_AS(contract(p2(), 3), Error);
  ContractionOptions tiny;
  tiny.materialization_cap = 10;
  CHECK_THROWS_AS(contract(family(KernelFamily::Constant, 4), 1, tiny), Error);
}

TEST_CASE("contraction norms closed forms") {
  CHECK(contraction_norm(p2(), 1) == doctest::Approx(std::sqrt(1.0 / 8.0)));
  CHECK(contraction_norm(family(KernelFamily::Constant, 3), 1) == doctest::Approx(std::sqrt(1.0 / 8.0)));
  for (std::uint64_t m : {1, 7, 100, 10000}) {
    const auto f = family(KernelFamily::DisjointPairs, m);
    CHECK(contraction_norm(f, 1) == doctest::Approx(1.0 / std::sqrt(8.0 * m)).epsilon(1e-12));
    CHECK(symmetrized_contraction_norm(f, 1) == doctest::Approx(1.0 / std::sqrt(8.0 * m)).epsilon(1e-12));
  }
  CHECK(symmetrized_contraction_norm(p2(), 1) == doctest::Approx(std::sqrt(1.0 / 8.0)));
  CHECK(contraction_norm(p2(), 0) == doctest::Approx(0.5));
  CHECK(contraction_norm(p2(), 2) == doctest::Approx(0.5));
}

TEST_CASE("Gram and materialized norms agree with the brute-force oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 120; ++trial) {
    const auto f = testing::random_kernel(rng, {1, 4, 5});
    for (int r = 0; r <= f.order(); ++r) {
      const auto dense = oracle::contraction(f, r);
      const double expect = oracle::frobenius(dense);
      CHECK(contraction_norm(f, r) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(contract(f, r).frobenius_norm() == doctest::Approx(expect).epsilon(1e-12));

      const int arity = 2 * (f.order() - r);
      if (arity > 6) continue;  // the dense permutation average is arity! per entry
      const auto sym = oracle::symmetrize(dense, arity, f.dimension());
      const double sym_expect = oracle::frobenius(sym);
      CHECK(symmetrized_contraction_norm(f, r) == doctest::Approx(sym_expect).epsilon(1e-11));
      CHECK(symmetrize(contract(f, r)).frobenius_norm() == doctest::Approx(sym_expect).epsilon(1e-11));
      CHECK(symmetrized_contraction_norm(f, r) <= contraction_norm(f, r) * (1 + 1e-12));
    }
  }
}

TEST_CASE("symmetrize") {
  ContractionTensor t;
  t.arity = 2;
  t.dimension = 2;
  t.values = {0.0, 1.0, 0.0, 0.0};
  const auto s = symmetrize(t);
  CHECK(s.symmetric);
  CHECK(s.values == std::vector<double>{0.0, 0.5, 0.5, 0.0});
  CHECK(symmetrize(s).values == s.values);
  CHECK(symmetrize(contract(p2(), 1)).values == contract(p2(), 1).values);

  // Seeded d = 2, N = 5 kernel against the dense permutation average.
  std::mt19937_64 rng(7);
  const auto f = testing::random_kernel(rng, {2, 2, 5});
  const auto sym = oracle::symmetrize(oracle::contraction(f, 1), 2, f.dimension());
  CHECK(symmetrized_contraction_norm(f, 1) == doctest::Approx(oracle::frobenius(sym)).epsilon(1e-12));

  // Full permutation invariance of a symmetrized rank-4 tensor.
  const auto g = testing::random_kernel(rng, {3, 3, 5});
  const auto sg = symmetrize(contract(g, 1));
  std::vector<Index> idx{1, 2, 3, 5};
  const double v = sg.at(idx);
  do {
    CHECK(sg.at(idx) == doctest::Approx(v).epsilon(1e-14));
  } while (std::next_permutation(idx.begin(), idx.end()));
}

TEST_CASE("influence profile") {
  const auto c3 = influence_profile(family(KernelFamily::Constant, 3));
  for (double v : c3.values) CHECK(v == doctest::Approx(1.0 / 6.0));
  const auto dm = influence_profile(family(KernelFamily::DisjointPairs, 25));
  CHECK(dm.max == doctest::Approx(1.0 / 100.0));
  CHECK(influence_profile(p2()).max == doctest::Approx(0.25));
  for (int d = 2; d <= 5; ++d) {
    KernelFamilySpec spec;
    spec.family = KernelFamily::Walsh;
    spec.order = d;
    for (std::uint64_t n : {static_cast<std::uint64_t>(d + 1), std::uint64_t{40}}) {
      spec.size = n;
      const auto w = influence_profile(generate_family(spec));
      double df = 1.0;
      for (int k = 2; k <= d; ++k) df *= k;
      CHECK(w.values[0] == doctest::Approx(1.0 / (df * df)));
      CHECK(w.max == doctest::Approx(1.0 / (df * df)));
    }
  }

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = testing::random_kernel(rng, {1, 4, 6});
    const auto p = influence_profile(f);
    double fact = 1.0;
    for (int k = 2; k <= f.order() - 1; ++k) fact *= k;
    CHECK(p.sum == doctest::Approx(f.squared_norm() / fact).epsilon(1e-12));
    for (Index i = 1; i <= f.dimension(); ++i) {
      CHECK(p.values[i - 1] >= 0.0);
      CHECK(p.values[i - 1] == doctest::Approx(oracle::influence(f, i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("chi-square constant and defect") {
  CHECK(chi_square_constant(2) == 1.0);
  CHECK(chi_square_constant(4) == doctest::Approx(1.0 / 18.0));
  CHECK_THROWS_AS(chi_square_constant(3), Error);
  CHECK_THROWS_AS(chi_square_defect(make_kernel(3, 3, {{{1, 2, 3}, 1.0}})), Error);

  // Constant kernel with E Q^2 = 2: the diagonal of f *_1 f carries 1/N in
  // squared norm, the off-diagonal residual (N-2)c^2 - c the rest.
  for (std::uint64_t n : {10, 50, 100, 200, 250}) {
    const double nn = static_cast<double>(n);
    const auto f = family(KernelFamily::Constant, n, 2.0);
    const double defect = chi_square_defect(f);
    const double off = (nn - 2.0) / std::sqrt(nn * (nn - 1.0)) - 1.0;
    CHECK(defect == doctest::Approx(std::sqrt(1.0 / nn + off * off)).epsilon(1e-12));
    if (n >= 50) {
      CHECK(defect >= 0.9 / std::sqrt(nn));
      CHECK(defect <= 1.1 / std::sqrt(nn));
    }
  }

  // Against the dense oracle for even orders.
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const auto f = testing::random_kernel(rng, {2, 4, 5});
    if (f.order() % 2 != 0) continue;
    const int d = f.order();
    const double c = chi_square_constant(d);
    const auto sym = oracle::symmetrize(oracle::contraction(f, d / 2), d, f.dimension());
    double sq = 0.0;
    std::size_t flat = 0;
    oracle::for_each_tuple(d, f.dimension(), [&](const std::vector<Index>& t) {
      const double diff = sym[flat++] - c * f.evaluate(t);
      sq += diff * diff;
    });
    CHECK(chi_square_defect(f) == doctest::Approx(std::sqrt(sq)).epsilon(1e-9));
  }
}

TEST_CASE("crux gap") {
  const auto c3 = crux_gap(family(KernelFamily::Constant, 3));
  CHECK(c3.contraction_sq == doctest::Approx(1.0 / 8.0));
  CHECK(c3.influence_sq == doctest::Approx(1.0 / 36.0));
  const auto dm = crux_gap(family(KernelFamily::DisjointPairs, 40));
  CHECK(dm.contraction_sq == doctest::Approx(1.0 / 320.0));
  CHECK(dm.influence_sq == doctest::Approx(1.0 / (16.0 * 1600.0)));
  const auto p = crux_gap(p2());
  CHECK(p.contraction_sq == doctest::Approx(1.0 / 8.0));
  CHECK(p.influence_sq == doctest::Approx(1.0 / 16.0));

  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = crux_gap(testing::random_kernel(rng, {2, 4, 8}));
    CHECK(g.contraction_sq >= g.influence_sq * (1 - 1e-12));
  }
}
