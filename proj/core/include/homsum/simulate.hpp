#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homsum/kernel.hpp"
#include "homsum/philox.hpp"

namespace homsum {

enum class Law { Gaussian, Rademacher, UniformUnitVariance, ShiftedExponential, TwoPoint };

/// Centered, unit-variance input law with analytic moment metadata.
class DistributionSpec {
 public:
  explicit DistributionSpec(Law law = Law::Gaussian, double p = 0.5);

  /// Accepts gaussian, rademacher, uniform_unit_variance (or uniform),
  /// shifted_exponential, and two_point(p) / two_point:p.
  static DistributionSpec parse(std::string_view text);

  Law law() const noexcept { return law_; }
  double p() const noexcept { return p_; }
  std::string name() const;

  double abs_third_moment() const noexcept;
  double third_moment() const noexcept;
  double fourth_moment() const noexcept;

  double sample(CounterStream& rng) const noexcept;
  void fill(CounterStream& rng, std::span<double> out) const noexcept;

 private:
  Law law_;
  double p_;
  double hi_ = 0.0;  // two_point atoms
  double lo_ = 0.0;
};

struct SampleConfig {
  std::uint64_t n = 10000;
  std::uint64_t seed = 0;
  /// 0 selects the available hardware parallelism.
  unsigned workers = 0;
  std::uint64_t batch_size = 1024;
};

struct MomentWithError {
  double value = 0.0;
  double std_error = 0.0;
};

struct SampleSummary {
  std::uint64_t n = 0;
  /// moments[k - 1] = empirical E[Q^k], k = 1..4.
  std::array<MomentWithError, 4> moments{};
  /// Empirical E|Q|^3.
  MomentWithError abs_third{};
  /// Samples in draw order.
  std::vector<double> samples;
  /// Samples sorted ascending.
  std::vector<double> sorted;
};

/// Upper limit on sample counts (memory for exact KS).
inline constexpr std::uint64_t kMaxSamples = 10'000'000;

/// n draws of Q(f, X) with X i.i.d. from `dist`. Draw k uses the Philox stream
/// (seed, k), so results do not depend on worker count or batch size.
SampleSummary sample_sums(const SymmetricKernel& f, const DistributionSpec& dist, const SampleConfig& config);

/// Standard normal CDF.
double normal_cdf(double x);
/// P(Z_nu <= x) for the centered chi-square Z_nu = chi2(nu) - nu.
double centered_chi2_cdf(double x, int nu);

/// Exact one-sample Kolmogorov statistic of sorted data against a continuous CDF.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);
double ks_normal(const SampleSummary& s);
double ks_chi2(const SampleSummary& s, int nu);

/// Half-width of the DKW confidence band at level 1 - alpha.
double dkw_band(std::uint64_t n, double alpha = 0.01);

struct VectorSampleSummary {
  std::uint64_t n = 0;
  std::size_t m = 0;
  /// joint[k * m + j] = Q_j on draw k.
  std::vector<double> joint;
  /// Empirical E[Q_i Q_j] and its standard error.
  std::vector<std::vector<double>> covariance;
  std::vector<std::vector<double>> covariance_std_error;
  /// Marginal Kolmogorov distances to N(0, 1).
  std::vector<double> marginal_ks;
};

/// Joint draws of several kernels sharing one input vector per draw. Kernels
/// of smaller dimension are padded to the largest N.
VectorSampleSummary sample_vector_sums(const std::vector<SymmetricKernel>& kernels, const DistributionSpec& dist,
                                       const SampleConfig& config);

/// Draws from N_m(0, V) with the same per-draw stream layout as sample_sums.
std::vector<double> sample_gaussian_vectors(const std::vector<std::vector<double>>& covariance, std::uint64_t n,
                                            std::uint64_t seed);

/// Two-sample sup distance between joint empirical CDFs (row-major samples of
/// dimension m), evaluated on at most `max_points` pooled points.
double joint_ks_two_sample(std::span<const double> a, std::span<const double> b, std::size_t m,
                           std::size_t max_points = 1000);

/// Raw dump: 8-byte magic, little-endian uint64 count, then little-endian doubles.
void write_sample_dump(const std::filesystem::path& path, std::span<const double> samples);
std::vector<double> read_sample_dump(const std::filesystem::path& path);

}  // namespace homsum
