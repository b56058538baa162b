#include <doctest.h>

#include <cmath>
#include <random>

#include "homsum/error.hpp"
#include "homsum/moments.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/gauss_hermite.hpp"
#include "oracles/trace_cumulants.hpp"
#include "support/random_kernels.hpp"

using namespace homsum;

namespace {

SymmetricKernel p2() { return make_kernel(2, 2, {{{1, 2}, 0.5}}); }

SymmetricKernel disjoint_pairs(std::uint64_t m) {
  KernelFamilySpec spec;
  spec.family = KernelFamily::DisjointPairs;
  spec.size = m;
  return generate_family(spec);
}

// Random unit-variance kernel small enough for the Wick expansion.
SymmetricKernel small_unit_kernel(std::mt19937_64& rng, int min_d, int max_d, Index max_n) {
  while (true) {
    auto f = testing::random_unit_kernel(rng, {min_d, max_d, max_n});
    if (f.entry_count() <= 14) return f;
  }
}

}  // namespace

TEST_CASE("hermite") {
  CHECK(hermite(0, 1.7) == 1.0);
  CHECK(hermite(2, 0.0) == -1.0);
  CHECK(hermite(1, 3.0) == 3.0);
  CHECK(hermite(3, 2.0) == 2.0);
  CHECK(hermite(4, 1.5) == doctest::Approx(std::pow(1.5, 4) - 6 * 1.5 * 1.5 + 3));
}

TEST_CASE("hermite orthogonality under Gauss-Hermite quadrature") {
  const auto rule = oracle::gauss_hermite_rule(20);
  for (int p = 0; p <= 6; ++p) {
    for (int q = 0; q <= 6; ++q) {
      double s = 0.0;
      for (const auto& [x, w] : rule) s += w * hermite(p, x) * hermite(q, x);
      double expect = 0.0;
      if (p == q) {
        expect = 1.0;
        for (int k = 2; k <= q; ++k) expect *= k;
      }
      CHECK(std::fabs(s - expect) <= 1e-8);
    }
  }
}

TEST_CASE("chi_square_moments") {
  auto check = [](int nu, double a, double b, double c) {
    const auto m = chi_square_moments(nu);
    CHECK(m.second == a);
    CHECK(m.third == b);
    CHECK(m.fourth == c);
  };
  check(1, 2, 8, 60);
  check(2, 4, 16, 144);
  check(10, 20, 80, 1680);
  CHECK_THROWS_AS(chi_square_moments(0), Error);
}

TEST_CASE("gaussian second and cross moments") {
  CHECK(gaussian_second_moment(p2()) == doctest::Approx(1.0));
  const auto dm = disjoint_pairs(30);
  CHECK(gaussian_cross_moment(dm, dm) == doctest::Approx(1.0));
  CHECK(gaussian_cross_moment(p2(), make_kernel(3, 3, {{{1, 2, 3}, 1.0}})) == 0.0);
  const auto shifted = dm.shifted(60, 120);
  CHECK(gaussian_cross_moment(dm, shifted) == 0.0);
}

TEST_CASE("gaussian fourth moment closed forms") {
  CHECK(gaussian_fourth_moment(p2()) == doctest::Approx(9.0));
  for (std::uint64_t m : {1, 3, 10, 1000}) {
    CHECK(gaussian_fourth_moment(disjoint_pairs(m)) == doctest::Approx(3.0 + 6.0 / m).epsilon(1e-12));
  }
  CHECK(gaussian_fourth_moment(make_kernel(1, 3, {{{1}, 0.6}, {{3}, 0.8}})) == doctest::Approx(3.0));
  CHECK_THROWS_AS(gaussian_fourth_moment(p2().scaled(2.0)), Error);
}

TEST_CASE("gaussian fourth moment matches the Wick expansion") {
  std::mt19937_64 rng(101);
  const auto law = oracle::gaussian_law_moments();
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = small_unit_kernel(rng, 1, 4, 6);
    const double expect = oracle::moment(f, 4, law);
    CHECK(gaussian_fourth_moment(f) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(gaussian_fourth_moment(f) >= 3.0 - 1e-12);
  }
}

TEST_CASE("gaussian fourth moment matches trace cumulants for d = 2") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = testing::random_unit_kernel(rng, {2, 2, 12});
    const auto tc = oracle::quadratic_form_moments(f);
    CHECK(tc.second == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gaussian_fourth_moment(f) == doctest::Approx(tc.fourth).epsilon(1e-11));
  }
}

TEST_CASE("gaussian third moment") {
  CHECK(gaussian_third_moment(make_kernel(3, 4, {{{1, 2, 3}, 1.0}})) == 0.0);
  CHECK(gaussian_third_moment(p2()) == 0.0);
  // Triangle on {1,2,3}: Q = 2(G1G2 + G2G3 + G1G3) f, E Q^3 = 8 * 6 f^3.
  CHECK(gaussian_third_moment(make_kernel(2, 3, {{{1, 2}, 0.5}, {{1, 3}, 0.5}, {{2, 3}, 0.5}})) ==
        doctest::Approx(6.0));

  std::mt19937_64 rng(109);
  const auto law = oracle::gaussian_law_moments();
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = small_unit_kernel(rng, 2, 4, 7).scaled(1.3);
    CHECK(gaussian_third_moment(f) == doctest::Approx(oracle::moment(f, 3, law)).epsilon(1e-10).scale(1.0));
    CHECK(3.0 * std::pow(gaussian_second_moment(f), 2) + gaussian_fourth_cumulant(f) ==
          doctest::Approx(oracle::moment(f, 4, law)).epsilon(1e-10));
  }
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = testing::random_unit_kernel(rng, {2, 2, 14});
    CHECK(gaussian_third_moment(f) == doctest::Approx(oracle::quadratic_form_moments(f).third).epsilon(1e-11).scale(1.0));
  }
}

TEST_CASE("exact Rademacher distribution") {
  const auto p = exact_rademacher_distribution(p2());
  REQUIRE(p.atoms().size() == 2);
  CHECK(p.atoms()[0].first == doctest::Approx(-1.0));
  CHECK(p.atoms()[0].second == 0.5);
  CHECK(p.moment(4) == doctest::Approx(1.0));

  const auto d2 = exact_rademacher_distribution(disjoint_pairs(2));
  REQUIRE(d2.atoms().size() == 3);
  CHECK(d2.atoms()[0].first == doctest::Approx(-std::sqrt(2.0)));
  CHECK(d2.atoms()[0].second == 0.25);
  CHECK(d2.atoms()[1].first == doctest::Approx(0.0));
  CHECK(d2.atoms()[1].second == 0.5);
  CHECK(d2.cdf(0.0) == 0.75);
  CHECK(d2.cdf(-2.0) == 0.0);

  const auto zero = exact_rademacher_distribution(SymmetricKernel(3, 30));
  REQUIRE(zero.atoms().size() == 1);
  CHECK(zero.atoms()[0] == ExactDistribution::Atom{0.0, 1.0});

  CHECK_THROWS_AS(exact_rademacher_distribution(disjoint_pairs(12)), Error);
}

TEST_CASE("exact Rademacher moments match the Wick expansion") {
  std::mt19937_64 rng(107);
  const auto law = oracle::rademacher_law_moments();
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = small_unit_kernel(rng, 1, 4, 7);
    const auto dist = exact_rademacher_distribution(f);
    double total = 0.0;
    for (const auto& [x, pr] : dist.atoms()) total += pr;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dist.moment(1) == doctest::Approx(0.0));
    CHECK(dist.moment(2) == doctest::Approx(oracle::moment(f, 2, law)).epsilon(1e-12));
    CHECK(dist.moment(3) == doctest::Approx(oracle::moment(f, 3, law)).epsilon(1e-10));
    CHECK(dist.moment(4) == doctest::Approx(oracle::moment(f, 4, law)).epsilon(1e-10));
  }
}

TEST_CASE("hypercontractivity checks") {
  const auto p = exact_rademacher_distribution(p2());
  auto r = hypercontractivity_check(p.abs_moment(3), p.moment(2), 3, 2, 1.0);
  CHECK(r.holds);
  CHECK(r.bound == doctest::Approx(std::pow(2 * std::sqrt(2.0), 6)));
  auto g = gaussian_hypercontractivity_check(9.0, 1.0, 4, 2);
  CHECK(g.holds);
  CHECK(g.bound == doctest::Approx(81.0));
  CHECK(hypercontractivity_check(1.0, 1.0, 2, 2, 1.0).bound == doctest::Approx(16.0));
  CHECK_FALSE(hypercontractivity_check(1e9, 1.0, 3, 1, 1.0).holds);
  CHECK_THROWS_AS(hypercontractivity_check(1.0, 1.0, 1.5, 2, 1.0), Error);
}

TEST_CASE("moment transfer bound") {
  CHECK(moment_transfer_bound(2, 4, 4, 3.0, 1.0, 0.0) == 0.0);
  const double c = 32.0 * 9.0 * std::pow(2.0 * std::sqrt(3.0), 12) * 8.0;
  CHECK(moment_transfer_constant(2, 4, 4, 3.0) == doctest::Approx(c).epsilon(1e-13));
  CHECK(moment_transfer_bound(2, 4, 4, 3.0, 1.0, 1.0 / 6.0) == doctest::Approx(c * std::sqrt(1.0 / 6.0)));
  CHECK(moment_transfer_bound(2, 4, 4, 3.0, 2.0, 1.0 / 6.0) ==
        doctest::Approx(8.0 * moment_transfer_bound(2, 4, 4, 3.0, 1.0, 1.0 / 6.0)));
  CHECK_THROWS_AS(moment_transfer_bound(2, 2, 4, 3.0, 1.0, 0.1), Error);
  CHECK_THROWS_AS(moment_transfer_bound(2, 3, 2, 3.0, 1.0, 0.1), Error);
  CHECK_THROWS_AS(moment_transfer_bound(2, 3, 4, 0.5, 1.0, 0.1), Error);
  CHECK_THROWS_AS(moment_transfer_bound(2, 3, 4, 3.0, 1.0, 1.5), Error);
}
