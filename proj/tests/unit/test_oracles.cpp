#include <doctest.h>

#include <cmath>

#include "homsum/kernel.hpp"
#include "homsum/simulate.hpp"
#include "oracles/const2_law.hpp"
#include "oracles/product_normal.hpp"

using namespace homsum;

TEST_CASE("product normal CDF: conditioning and Bessel routes agree") {
  for (double z : {-4.0, -1.5, -0.3, 0.0, 0.2, 0.9, 2.5, 5.0}) {
    CHECK(oracle::product_normal_cdf_conditioning(z) == doctest::Approx(oracle::product_normal_cdf_bessel(z)).epsilon(1e-9));
  }
  // Symmetric law.
  CHECK(oracle::product_normal_cdf_conditioning(1.3) + oracle::product_normal_cdf_conditioning(-1.3) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const double ks = oracle::product_normal_ks_to_normal();
  CHECK(ks > 0.05);
  CHECK(ks < 0.2);
}

TEST_CASE("constant quadratic form law") {
  SUBCASE("N = 2 is sqrt(2) times a product of normals") {
    for (double x : {-3.0, -1.0, -0.2, 0.0, 0.4, 1.7}) {
      CHECK(oracle::const2_cdf(x, 2) ==
            doctest::Approx(oracle::product_normal_cdf_bessel(x / std::sqrt(2.0))).epsilon(1e-8));
    }
  }
  SUBCASE("matches the simulated law within the DKW band") {
    for (int n : {10, 50}) {
      const auto f = generate_family({KernelFamily::Constant, 2, static_cast<std::uint64_t>(n), 2.0});
      const auto s = sample_sums(f, DistributionSpec(Law::Gaussian), {10000, 7, 1, 1024});
      const double band = dkw_band(s.n);
      const double ks = ks_statistic(s.sorted, [n](double x) { return oracle::const2_cdf(x, n); });
      CHECK(ks < band);
    }
  }
  SUBCASE("distance to the centered chi-square shrinks with N") {
    const double a = oracle::const2_ks_to_centered_chi2(10);
    const double b = oracle::const2_ks_to_centered_chi2(250);
    CHECK(b < a);
    CHECK(b > 0.0);
  }
}
