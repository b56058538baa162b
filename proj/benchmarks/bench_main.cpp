#include <benchmark/benchmark.h>

#include "homsum/contraction.hpp"
#include "homsum/kernel.hpp"
#include "homsum/moments.hpp"
#include "homsum/simulate.hpp"

namespace {

homsum::SymmetricKernel random_kernel(int d, std::uint64_t n, double density) {
  homsum::KernelFamilySpec spec;
  spec.family = homsum::KernelFamily::RandomSparse;
  spec.order = d;
  spec.size = n;
  spec.density = density;
  spec.seed = 1;
  return homsum::generate_family(spec);
}

homsum::SymmetricKernel disjoint_pairs(std::uint64_t m) {
  homsum::KernelFamilySpec spec;
  spec.family = homsum::KernelFamily::DisjointPairs;
  spec.size = m;
  return homsum::generate_family(spec);
}

void BM_ContractionNormGram(benchmark::State& state) {
  const auto f = random_kernel(3, static_cast<std::uint64_t>(state.range(0)), 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(homsum::contraction_norm(f, 1));
  state.counters["entries"] = static_cast<double>(f.entry_count());
}
BENCHMARK(BM_ContractionNormGram)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_SymmetrizedContractionNorm(benchmark::State& state) {
  const auto f = random_kernel(4, static_cast<std::uint64_t>(state.range(0)), 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(homsum::symmetrized_contraction_norm(f, 2));
  state.counters["entries"] = static_cast<double>(f.entry_count());
}
BENCHMARK(BM_SymmetrizedContractionNorm)->Arg(10)->Arg(16)->Arg(22)->Unit(benchmark::kMillisecond);

void BM_ChiSquareDefectConstant(benchmark::State& state) {
  homsum::KernelFamilySpec spec;
  spec.family = homsum::KernelFamily::Constant;
  spec.size = static_cast<std::uint64_t>(state.range(0));
  spec.target_variance = 2.0;
  const auto f = homsum::generate_family(spec);
  for (auto _ : state) benchmark::DoNotOptimize(homsum::chi_square_defect(f));
}
BENCHMARK(BM_ChiSquareDefectConstant)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_GaussianFourthMoment(benchmark::State& state) {
  const auto f = random_kernel(3, static_cast<std::uint64_t>(state.range(0)), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(homsum::gaussian_fourth_moment(f));
}
BENCHMARK(BM_GaussianFourthMoment)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_RademacherEnumeration(benchmark::State& state) {
  const auto f = random_kernel(2, static_cast<std::uint64_t>(state.range(0)), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(homsum::exact_rademacher_distribution(f).atoms().size());
}
BENCHMARK(BM_RademacherEnumeration)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SampleSums(benchmark::State& state) {
  const auto f = disjoint_pairs(static_cast<std::uint64_t>(state.range(0)));
  const homsum::DistributionSpec law(static_cast<homsum::Law>(state.range(1)));
  homsum::SampleConfig config;
  config.n = 2000;
  config.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(homsum::sample_sums(f, law, config).moments[1].value);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.n));
  state.SetLabel(law.name());
}
BENCHMARK(BM_SampleSums)
    ->ArgsProduct({{100, 10000}, {static_cast<int>(homsum::Law::Gaussian), static_cast<int>(homsum::Law::Rademacher),
                                  static_cast<int>(homsum::Law::UniformUnitVariance)}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
