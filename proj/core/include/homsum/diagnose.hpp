#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homsum/bounds.hpp"
#include "homsum/contraction.hpp"
#include "homsum/kernel.hpp"
#include "homsum/simulate.hpp"

namespace homsum {

enum class TargetLaw { Normal, ChiSquare };
std::string_view to_string(TargetLaw t) noexcept;

/// A kernel family swept over increasing size parameters.
struct SequenceSpec {
  /// Template for every point; `size` is replaced by each sweep value and the
  /// variance by the target's (1 or 2 nu).
  KernelFamilySpec family;
  std::vector<std::uint64_t> sweep;
  TargetLaw target = TargetLaw::Normal;
  int nu = 1;
  std::vector<DistributionSpec> laws;
  /// n = 0 skips simulation.
  SampleConfig sample{0, 0, 0, 1024};
  double tolerance = 1e-9;
  double terminal_threshold = 0.05;
  ContractionOptions contraction;
};

enum class Trend { Decreasing, Stagnant, Undefined };
std::string_view to_string(Trend t) noexcept;

/// Trend verdict for one statistic, with the values it was computed from.
struct StatisticVerdict {
  std::string statistic;
  std::vector<double> values;
  Trend trend = Trend::Undefined;
  bool below_threshold = false;
  /// Decreasing and terminal value below the threshold.
  bool passed = false;
};

struct LawKs {
  std::string law;
  double ks = 0.0;
};

struct SweepPoint {
  std::uint64_t size = 0;
  int order = 0;
  std::uint64_t dimension = 0;
  /// Exact Gaussian E[Q^4] (normal target).
  std::optional<double> fourth_moment;
  /// ||f *_r f|| for r = 1..d-1 (multivariate: max over kernels).
  std::vector<double> contraction_norms;
  std::optional<double> chi_square_defect;
  double max_influence = 0.0;
  std::vector<LawKs> ks;
  // multivariate points
  std::vector<std::vector<double>> cross_moments;
  std::vector<std::vector<double>> delta;
  std::optional<double> covariance_residual;
  std::optional<double> joint_ks;
};

struct DeJongSummary {
  std::string law;
  MomentEstimate fourth_moment;
  double max_influence = 0.0;
  std::optional<double> ks;
  std::optional<double> dkw_band;
  bool fourth_moment_close = false;  // |E Q^4 - 3| < threshold
  bool influence_small = false;      // max Inf < threshold
  BoundReport smooth_bound;
  BoundReport wasserstein;
};

struct VerdictReport {
  std::string kind;  // fourth_moment | chi_square | de_jong | universality | multivariate
  TargetLaw target = TargetLaw::Normal;
  std::optional<int> nu;
  double tolerance = 1e-9;
  double terminal_threshold = 0.05;
  std::vector<SweepPoint> points;
  std::vector<StatisticVerdict> statistics;
  /// Empty when undefined (fewer than two sweep points).
  std::optional<bool> verdict;
  /// Statistics that failed their verdict or assumption.
  std::vector<std::string> flagged;
  std::optional<DeJongSummary> de_jong;
  /// Universality: largest DKW band and spread of terminal KS values.
  std::optional<double> dkw_band;
  std::optional<double> terminal_ks_spread;
};

/// Step k passes when v[k+1] < v[k] - tol, or both values are within tol of 0.
Trend classify_trend(const std::vector<double>& values, double tolerance);
StatisticVerdict judge_statistic(std::string name, std::vector<double> values, double tolerance, double threshold);
/// Overall verdict from statistic verdicts: empty if any trend is undefined.
std::optional<bool> combine_verdicts(const std::vector<StatisticVerdict>& statistics);

/// E[Q^k] under `dist`: exact Gaussian identities, Rademacher
/// enumeration when at most 22 indices are active, otherwise the Monte Carlo
/// estimate from `samples` (required in that case).
MomentEstimate estimate_moment(const SymmetricKernel& f, const DistributionSpec& dist, int k,
                               const SampleSummary* samples);

VerdictReport fourth_moment_diagnostic(const SequenceSpec& spec);
VerdictReport chi_square_diagnostic(const SequenceSpec& spec, int nu);

struct DeJongOptions {
  TestFunctionBudget budget{1.0, 1.0, 1.0};
  double threshold = 0.05;
  ContractionOptions contraction;
};

VerdictReport de_jong_report(const SymmetricKernel& f, const DistributionSpec& dist, const SampleConfig& config,
                             const DeJongOptions& options = {});

/// Universality verdict: every law's KS decreases and terminal KS values agree
/// within 3 times the largest DKW band. Needs at least two laws.
VerdictReport universality_experiment(const SequenceSpec& spec);

struct MultivariateSpec {
  std::vector<std::uint64_t> sweep;  // labels for the points
  std::vector<std::vector<SymmetricKernel>> kernels;
  std::vector<std::vector<double>> covariance;
  std::vector<DistributionSpec> laws;
  SampleConfig sample{0, 0, 0, 1024};
  double tolerance = 1e-9;
  double terminal_threshold = 0.05;
};

VerdictReport multivariate_diagnostic(const MultivariateSpec& spec);

}  // namespace homsum
