#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "homsum/bounds.hpp"
#include "homsum/error.hpp"
#include "homsum/moments.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/trace_cumulants.hpp"
#include "support/random_kernels.hpp"

using namespace homsum;

namespace {

SymmetricKernel p2() { return make_kernel(2, 2, {{{1, 2}, 0.5}}); }

SymmetricKernel family(KernelFamily fam, std::uint64_t size, double var = 1.0, int d = 2) {
  KernelFamilySpec spec;
  spec.family = fam;
  spec.order = d;
  spec.size = size;
  spec.target_variance = var;
  return generate_family(spec);
}

MomentEstimate exact(double v) { return {v, 0.0, Exactness::Exact, "test"}; }

}  // namespace

TEST_CASE("c_star") {
  CHECK(c_star({0, 0, 0}, 2) == 0.0);
  const double expect = 4 * std::numbers::sqrt2 * 126 * (2 * std::numbers::sqrt2 / std::sqrt(std::numbers::pi));
  CHECK(c_star({0, 0, 3}, 2) == doctest::Approx(expect));
  CHECK(c_star({0, 0, 6}, 3) == doctest::Approx(2 * c_star({0, 0, 3}, 3)));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    TestFunctionBudget b{u(rng), u(rng), u(rng)};
    const int d = 1 + trial % 5;
    const double base = c_star(b, d);
    CHECK(c_star({b.a + 0.1, b.b, b.b3}, d) >= base);
    CHECK(c_star({b.a, b.b + 0.1, b.b3}, d) >= base);
    CHECK(c_star({b.a, b.b, b.b3 + 0.1}, d) >= base);
    CHECK(c_star(b, d + 1) >= base);
  }
}

TEST_CASE("T1 and T2 closed forms") {
  CHECK(t1(p2()).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t2(p2(), 9.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::uint64_t m : {1, 10, 1000}) {
    const auto f = family(KernelFamily::DisjointPairs, m);
    CHECK(t1(f).value == doctest::Approx(1.0 / std::sqrt(m)).epsilon(1e-12));
    CHECK(t2(f, 3.0 + 6.0 / m) == doctest::Approx(1.0 / std::sqrt(m)).epsilon(1e-12));
  }
  CHECK(t1(make_kernel(1, 2, {{{1}, 0.6}, {{2}, 0.8}})).value == 0.0);
  CHECK(t2(p2(), 3.0) == 0.0);
  CHECK_THROWS_AS(t1(p2().scaled(3.0)), Error);
}

TEST_CASE("T1 <= T2 with Wick-exact fourth moments") {
  std::mt19937_64 rng(501);
  const auto law = oracle::gaussian_law_moments();
  int cases = 0;
  while (cases < 500) {
    const auto f = testing::random_unit_kernel(rng, {2, 3, 8});
    if (f.entry_count() > 10) continue;
    ++cases;
    const double ef4 = oracle::moment(f, 4, law);
    CHECK(t1(f).value <= t2(f, ef4) * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("T1 upper-bound fallback") {
  std::mt19937_64 rng(503);
  ContractionOptions tiny;
  tiny.materialization_cap = 1;
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = testing::random_unit_kernel(rng, {3, 4, 7});
    const auto exact_t1 = t1(f);
    const auto upper = t1(f, tiny);
    CHECK(exact_t1.exactness == Exactness::Exact);
    CHECK(upper.exactness == Exactness::UpperBound);
    CHECK(upper.value >= exact_t1.value * (1 - 1e-12));
  }
}

TEST_CASE("T3 and T4") {
  CHECK(t4(8.0, 60.0, 1, 2) == 0.0);
  CHECK_THROWS_AS(t3(make_kernel(3, 3, {{{1, 2, 3}, 1.0}}), 1), Error);
  CHECK_THROWS_AS(t3(p2(), 1), Error);  // variance 1, not 2

  const double t10 = t3(family(KernelFamily::Constant, 10, 2.0), 1).value;
  const double t50 = t3(family(KernelFamily::Constant, 50, 2.0), 1).value;
  CHECK(t50 < t10);

  // d = 2: T3 equals T4 evaluated at exact Gaussian moments.
  std::mt19937_64 rng(601);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = normalize_to_variance(testing::random_kernel(rng, {2, 2, 10}), 2.0);
    const auto m = oracle::quadratic_form_moments(f);
    const double lhs = t3(f, 1).value;
    const double rhs = t4(m.third, m.fourth, 1, 2);
    CHECK(lhs <= rhs * (1 + 1e-9) + 1e-12);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
  }
  // d = 4 with Wick-exact moments.
  const auto law = oracle::gaussian_law_moments();
  int cases = 0;
  while (cases < 40) {
    auto g = testing::random_kernel(rng, {4, 4, 7});
    if (g.entry_count() > 7) continue;
    ++cases;
    const int nu = 1 + cases % 3;
    g = normalize_to_variance(g, 2.0 * nu);
    const double ef3 = oracle::moment(g, 3, law);
    const double ef4 = oracle::moment(g, 4, law);
    CHECK(t3(g, nu).value <= t4(ef3, ef4, nu, 4) * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("invariance bound") {
  CHECK(invariance_bound(make_kernel(1, 1, {{{1}, 1.0}}), 1.0, 1.0) == doctest::Approx(30.0));
  CHECK(invariance_bound(family(KernelFamily::Constant, 3), 2.0, 1.0) ==
        doctest::Approx(3600.0 * 2.0 * std::sqrt(1.0 / 6.0)));
}

TEST_CASE("normal smooth bound") {
  const MomentProfile rad{1.0, 1.0};
  double previous = INFINITY;
  for (std::uint64_t m : {2, 5, 10}) {
    const auto f = family(KernelFamily::DisjointPairs, m);
    const double eq4 = exact_rademacher_distribution(f).moment(4);
    CHECK(eq4 == doctest::Approx(3.0 - 2.0 / m));
    const auto rep = normal_smooth_bound(f, rad, {0, 0, 1}, exact(eq4));
    REQUIRE(rep.total);
    CHECK(std::isfinite(*rep.total));
    CHECK(*rep.total < previous);
    previous = *rep.total;
    CHECK(*rep.total == smooth_total(*rep.invariance, *rep.c_star, *rep.scale, *rep.moment_gap_term,
                                     *rep.influence_term));
    // T1, T2 describe Q(G) whatever law supplied eq4x.
    CHECK(*rep.t2 == doctest::Approx(1.0 / std::sqrt(m)).epsilon(1e-12));
    CHECK(*rep.t1 <= *rep.t2 * (1 + 1e-9));
  }
  const auto rep = normal_smooth_bound(p2(), {std::sqrt(8.0 / std::numbers::pi), 3.0}, {0, 0, 1}, exact(9.0));
  CHECK(*rep.t2 == doctest::Approx(1.0));
  CHECK(*rep.total >= *rep.c_star * std::sqrt(1.0 / 6.0) * std::sqrt(6.0));
}

TEST_CASE("Wasserstein bound") {
  const auto p = wasserstein_bound(p2(), {1.0, 3.0}, exact(9.0));
  CHECK_FALSE(p.applicable);
  CHECK_FALSE(p.total.has_value());
  CHECK(*p.b2 > wasserstein_threshold());

  CHECK(*wasserstein_total(wasserstein_threshold(), 0.0) == doctest::Approx(4.0 * std::cbrt(wasserstein_threshold())));
  // Gaussian inputs, D(m) statistics at very large m: applicable; the maxInf^{1/4}
  // term dominates B2, so the bound scales like (m^{-1/4})^{1/3} = m^{-1/12}.
  double prev = 0.0;
  for (double m : {1e36, 1e44}) {
    const auto rep = wasserstein_bound_from_statistics(2, 1.0 / (4.0 * m), {std::sqrt(8.0 / std::numbers::pi), 3.0},
                                                       exact(3.0 + 6.0 / m));
    CHECK(rep.applicable);
    if (prev > 0.0) CHECK(*rep.total / prev == doctest::Approx(std::pow(1e8, -1.0 / 12.0)).epsilon(1e-3));
    prev = *rep.total;
  }
}

TEST_CASE("chi-square smooth bound") {
  CHECK(chi_square_prefactor(1) == 3.0);
  CHECK(chi_square_prefactor(4) == doctest::Approx(std::sqrt(2 * std::numbers::pi / 4)));
  const auto f = family(KernelFamily::Constant, 10, 2.0);
  const auto rep = chi_square_smooth_bound(f, {1.0, 1.0}, {0, 0, 1}, 1, exact(8.0), exact(60.0));
  CHECK(*rep.moment_gap_term == 0.0);
  CHECK(*rep.total == *rep.invariance + 3.0 * *rep.scale * *rep.influence_term);
  CHECK(*rep.t3 == doctest::Approx(*rep.t4).epsilon(1e-8));

  std::mt19937_64 rng(607);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = normalize_to_variance(testing::random_kernel(rng, {4, 4, 8}), 2.0);
    const auto r = chi_square_smooth_bound(g, {1.0, 1.0}, {0, 0, 1}, 1, exact(8.0), exact(60.0));
    CHECK(*r.t3 <= *r.t4 * (1 + 1e-9) + 1e-12);
  }
  CHECK_THROWS_AS(chi_square_smooth_bound(make_kernel(3, 3, {{{1, 2, 3}, 1.0}}), {1, 1}, {0, 0, 1}, 1, exact(0),
                                          exact(0)),
                  Error);
}

TEST_CASE("delta and multivariate bounds") {
  for (std::uint64_t m : {1, 100, 10000}) {
    const auto f = family(KernelFamily::DisjointPairs, m);
    CHECK(delta_ij(f, f) == doctest::Approx(std::sqrt(2.0) / std::sqrt(m)).epsilon(1e-9));
  }
  std::mt19937_64 rng(701);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = testing::random_unit_kernel(rng, {3, 3, 7});
    const auto b = testing::random_unit_kernel(rng, {3, 3, 7});
    CHECK(delta_ij(a, b) == doctest::Approx(delta_ij(b, a)).epsilon(1e-14));
  }
  const auto f2 = family(KernelFamily::Walsh, 6, 1.0, 2);
  const auto f4 = family(KernelFamily::Walsh, 6, 1.0, 4);
  CHECK_THROWS_AS(delta_ij(f4, f2), Error);
  const double indicator = std::sqrt(24.0 * 6.0 * contraction_norm(f4, 2));
  CHECK(delta_ij(f2, f4) > indicator);

  const auto d100 = family(KernelFamily::DisjointPairs, 100);
  const auto rep = multivariate_smooth_bound({d100, d100}, {1.0, 1.0}, {1.0, 1.0});
  CHECK(rep.delta[0][1] == doctest::Approx(std::sqrt(2.0) / 10.0));
  CHECK(*rep.c_influence_sum == doctest::Approx(0.5));
  CHECK(*rep.total == multivariate_total(rep.delta, 1.0, 1.0, *rep.c_influence_sum, *rep.prefactor,
                                         *rep.max_influence));
  CHECK(*multivariate_smooth_bound({d100}, {1.0, 1.0}, {0.0, 0.0}).total == 0.0);
  const auto single = multivariate_smooth_bound({d100}, {1.0, 1.0}, {1.0, 0.0});
  CHECK(*single.total == doctest::Approx(rep.delta[0][0]));
}

TEST_CASE("convex sets bound") {
  const auto d = family(KernelFamily::DisjointPairs, 50);
  const auto other = d.shifted(100, 200);
  const auto rep = convex_sets_bound({d, other}, {1.0, 1.0}, std::vector<std::vector<double>>{{1, 0}, {0, 1}});
  CHECK(*rep.b_factor == 1.0);
  CHECK(*rep.total == doctest::Approx(8.0 * std::pow(*rep.b1 + *rep.b2, 0.25) * std::pow(2.0, 0.375)));
  CHECK(convex_total(0.0, 0.0, 1.0, 3) == 0.0);
  CHECK(covariance_b_factor({{1, 1}, {1, 1}}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(covariance_b_factor({{1, 0.5}, {0.4, 1}}), Error);
  CHECK_THROWS_AS(covariance_b_factor({{1, 2}, {2, 1}}), Error);
  const auto same = convex_sets_bound({d, d}, {1.0, 1.0});
  CHECK(*same.b_factor == doctest::Approx(0.5));
}
