#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "homsum/error.hpp"
#include "homsum/kernel.hpp"
#include "homsum/kernel_io.hpp"
#include "oracles/brute_force.hpp"
#include "support/random_kernels.hpp"

using namespace homsum;

namespace {

SymmetricKernel p2() { return make_kernel(2, 2, {{{1, 2}, 0.5}}); }

SymmetricKernel c3() {
  const double c = 1.0 / std::sqrt(12.0);
  return make_kernel(2, 3, {{{1, 2}, c}, {{1, 3}, c}, {{2, 3}, c}});
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Usage;
}

}  // namespace

TEST_CASE("make_kernel validates canonical tuples") {
  CHECK(p2().entry_count() == 1);
  CHECK(code_of([] { make_kernel(2, 2, {{{1, 1}, 0.5}}); }) == ErrorCode::NonCanonicalTuple);
  CHECK(code_of([] { make_kernel(2, 2, {{{2, 1}, 0.5}}); }) == ErrorCode::NonCanonicalTuple);
  CHECK(code_of([] { make_kernel(2, 2, {{{1, 3}, 0.5}}); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([] { make_kernel(2, 3, {{{1, 3}, 0.5}, {{1, 3}, 0.1}}); }) == ErrorCode::DuplicateTuple);
  CHECK(make_kernel(2, 3, {{{1, 3}, 0.0}}).empty());
}

TEST_CASE("evaluate is symmetric and vanishes on diagonals") {
  const auto f = p2();
  CHECK(f.evaluate(std::vector<Index>{2, 1}) == 0.5);
  CHECK(f.evaluate(std::vector<Index>{1, 1}) == 0.0);
  CHECK(code_of([&] { f.evaluate(std::vector<Index>{1, 3}); }) == ErrorCode::IndexOutOfRange);

  const auto g = make_kernel(3, 4, {{{1, 2, 3}, 1.5}, {{2, 3, 4}, -2.0}});
  CHECK(g.entry_count() == 2);
  CHECK(g.evaluate(std::vector<Index>{3, 1, 2}) == 1.5);
  CHECK(g.evaluate(std::vector<Index>{4, 2, 3}) == -2.0);
  CHECK(g.evaluate(std::vector<Index>{1, 2, 4}) == 0.0);

  CHECK(c3().evaluate(std::vector<Index>{3, 1}) == doctest::Approx(1.0 / std::sqrt(12.0)));
}

TEST_CASE("evaluate is invariant under permutations (random kernels)") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = testing::random_kernel(rng, {1, 4, 7});
    std::vector<Index> idx(static_cast<std::size_t>(f.order()));
    std::uniform_int_distribution<Index> pick(1, f.dimension());
    for (auto& i : idx) i = pick(rng);
    const double v = f.evaluate(idx);
    std::sort(idx.begin(), idx.end());
    do {
      CHECK(f.evaluate(idx) == v);
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
}

TEST_CASE("squared_norm") {
  CHECK(p2().squared_norm() == doctest::Approx(0.5));
  CHECK(c3().squared_norm() == doctest::Approx(0.5));
  CHECK(SymmetricKernel(2, 4).squared_norm() == 0.0);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 150; ++trial) {
    const auto f = testing::random_kernel(rng, {1, 3, 6});
    CHECK(f.squared_norm() == doctest::Approx(oracle::squared_norm(f)).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_sum") {
  const auto f = p2();
  CHECK(f.evaluate_sum(std::vector<double>{1, 1}) == 1.0);
  CHECK(f.evaluate_sum(std::vector<double>{1, -1}) == -1.0);
  CHECK(f.evaluate_sum(std::vector<double>{0, 0}) == 0.0);
  CHECK(code_of([&] { f.evaluate_sum(std::vector<double>{1, 1, 1}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("evaluate_sum decomposes as U_i + x_i V_i") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = testing::random_kernel(rng, {1, 4, 8});
    std::vector<double> x(f.dimension());
    for (auto& v : x) v = normal(rng);
    const Index i = std::uniform_int_distribution<Index>(0, f.dimension() - 1)(rng);
    auto at = [&](double xi) {
      auto y = x;
      y[i] = xi;
      return f.evaluate_sum(y);
    };
    const double u = at(0.0);
    const double v = at(1.0) - u;
    const double lambda = normal(rng);
    CHECK(at(lambda * x[i]) == doctest::Approx(u + lambda * x[i] * v).epsilon(1e-10));
  }
}

TEST_CASE("normalize_to_variance") {
  const auto f = normalize_to_variance(p2(), 1.0);
  CHECK(f.value(0) == doctest::Approx(0.5).epsilon(1e-15));
  const auto g = normalize_to_variance(c3().scaled(2.0), 1.0);
  CHECK(g.value(0) == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-14));
  CHECK(code_of([] { normalize_to_variance(SymmetricKernel(2, 3), 1.0); }) == ErrorCode::ZeroKernel);
}

TEST_CASE("generate_family") {
  auto gen = [](KernelFamily fam, int d, std::uint64_t size, double var = 1.0) {
    KernelFamilySpec spec;
    spec.family = fam;
    spec.order = d;
    spec.size = size;
    spec.target_variance = var;
    spec.seed = 3;
    return generate_family(spec);
  };
  auto variance = [](const SymmetricKernel& f) {
    double fact = 1.0;
    for (int k = 2; k <= f.order(); ++k) fact *= k;
    return fact * f.squared_norm();
  };

  CHECK(gen(KernelFamily::SinglePair, 2, 2) == p2());

  const auto c = gen(KernelFamily::Constant, 2, 3);
  CHECK(c.entry_count() == 3);
  CHECK(c.value(0) == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-14));

  const auto dm = gen(KernelFamily::DisjointPairs, 2, 4);
  CHECK(dm.dimension() == 8);
  CHECK(dm.entry_count() == 4);
  CHECK(dm.value(2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(dm.evaluate(std::vector<Index>{6, 5}) == doctest::Approx(0.25));

  const auto w = gen(KernelFamily::Walsh, 2, 5);
  CHECK(w.entry_count() == 4);
  CHECK(w.evaluate(std::vector<Index>{1, 5}) == doctest::Approx(0.25).epsilon(1e-15));
  const auto w4 = gen(KernelFamily::Walsh, 4, 9);
  CHECK(w4.entry_count() == 6);
  CHECK(w4.evaluate(std::vector<Index>{1, 2, 3, 7}) == doctest::Approx(1.0 / (24.0 * std::sqrt(6.0))));

  const auto c2 = gen(KernelFamily::Constant, 2, 40, 2.0);
  CHECK(c2.value(0) == doctest::Approx(1.0 / std::sqrt(40.0 * 39.0)).epsilon(1e-13));

  for (const auto& f : {gen(KernelFamily::SinglePair, 2, 2), gen(KernelFamily::Constant, 2, 17),
                        gen(KernelFamily::DisjointPairs, 2, 1000), gen(KernelFamily::Walsh, 3, 30),
                        gen(KernelFamily::RandomSparse, 3, 9), gen(KernelFamily::RandomSparse, 4, 12, 2.5)}) {
    const double target = variance(f) > 1.5 ? 2.5 : 1.0;
    CHECK(variance(f) == doctest::Approx(target).epsilon(1e-12));
    CHECK(normalize_to_variance(f, target).values().size() == f.values().size());
    const auto again = normalize_to_variance(f, target);
    for (std::size_t k = 0; k < f.entry_count(); ++k) CHECK(again.value(k) == doctest::Approx(f.value(k)).epsilon(1e-14));
  }

  CHECK(gen(KernelFamily::RandomSparse, 3, 9) == gen(KernelFamily::RandomSparse, 3, 9));

  CHECK(code_of([&] { gen(KernelFamily::DisjointPairs, 2, 0); }) == ErrorCode::UnsupportedFamilyParameters);
  CHECK(code_of([&] { gen(KernelFamily::Constant, 3, 5); }) == ErrorCode::UnsupportedFamilyParameters);
  CHECK(code_of([&] { gen(KernelFamily::Walsh, 3, 3); }) == ErrorCode::UnsupportedFamilyParameters);
}

TEST_CASE("kernel text format round-trips byte for byte") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = testing::random_kernel(rng);
    const auto text = write_kernel_text(f);
    const auto g = read_kernel_text(text);
    CHECK(g == f);
    CHECK(write_kernel_text(g) == text);
  }
  const auto empty = SymmetricKernel(3, 5);
  CHECK(read_kernel_text(write_kernel_text(empty)) == empty);

  CHECK(code_of([] { read_kernel_text("{ not json"); }) == ErrorCode::MalformedInput);
  CHECK(code_of([] { read_kernel_text(R"({"format":"homsum-kernel/1","d":2,"N":2,"entries":[[2,1,0.5]]})"); }) ==
        ErrorCode::NonCanonicalTuple);
  CHECK(code_of([] { read_kernel_text(R"({"format":"homsum-kernel/1","d":2,"N":2,"entries":[[1,2]]})"); }) ==
        ErrorCode::MalformedInput);
}
