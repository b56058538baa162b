#include "homsum/diagnose.hpp"

#include <algorithm>
#include <cmath>

#include "homsum/error.hpp"
#include "homsum/moments.hpp"

namespace homsum {

std::string_view to_string(TargetLaw t) noexcept {
  return t == TargetLaw::Normal ? "normal" : "chi2";
}

std::string_view to_string(Trend t) noexcept {
  switch (t) {
    case Trend::Decreasing: return "decreasing";
    case Trend::Stagnant: return "stagnant";
    case Trend::Undefined: return "undefined";
  }
  return "undefined";
}

Trend classify_trend(const std::vector<double>& values, double tolerance) {
  if (values.size() < 2) return Trend::Undefined;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double a = values[k];
    const double b = values[k + 1];
    const bool vanished = std::fabs(a) <= tolerance && std::fabs(b) <= tolerance;
    if (!(b < a - tolerance) && !vanished) return Trend::Stagnant;
  }
  return Trend::Decreasing;
}

StatisticVerdict judge_statistic(std::string name, std::vector<double> values, double tolerance, double threshold) {
  StatisticVerdict v;
  v.statistic = std::move(name);
  v.trend = classify_trend(values, tolerance);
  v.below_threshold = !values.empty() && std::fabs(values.back()) < threshold;
  v.passed = v.trend == Trend::Decreasing && v.below_threshold;
  v.values = std::move(values);
  return v;
}

std::optional<bool> combine_verdicts(const std::vector<StatisticVerdict>& statistics) {
  bool all = true;
  for (const auto& s : statistics) {
    if (s.trend == Trend::Undefined) return std::nullopt;
    all = all && s.passed;
  }
  return all;
}

namespace {

void require_sweep(const std::vector<std::uint64_t>& sweep) {
  if (sweep.empty()) throw Error(ErrorCode::ParameterOutOfRange, "sweep is empty");
  for (std::size_t k = 0; k + 1 < sweep.size(); ++k) {
    if (sweep[k + 1] <= sweep[k]) throw Error(ErrorCode::ParameterOutOfRange, "sweep must be strictly increasing");
  }
}

SymmetricKernel point_kernel(const SequenceSpec& spec, std::uint64_t size, double variance) {
  KernelFamilySpec family = spec.family;
  family.size = size;
  family.target_variance = variance;
  return generate_family(family);
}

std::vector<LawKs> point_ks(const SymmetricKernel& f, const SequenceSpec& spec) {
  std::vector<LawKs> out;
  if (spec.sample.n == 0) return out;
  for (const auto& law : spec.laws) {
    const auto s = sample_sums(f, law, spec.sample);
    const double ks = spec.target == TargetLaw::Normal ? ks_normal(s) : ks_chi2(s, spec.nu);
    out.push_back({law.name(), ks});
  }
  return out;
}

void finish(VerdictReport& rep) {
  rep.verdict = combine_verdicts(rep.statistics);
  for (const auto& s : rep.statistics) {
    if (s.trend != Trend::Undefined && !s.passed) rep.flagged.push_back(s.statistic);
  }
}

std::vector<double> column(const std::vector<SweepPoint>& points, auto get) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(get(p));
  return out;
}

}  // namespace

VerdictReport fourth_moment_diagnostic(const SequenceSpec& spec) {
  require_sweep(spec.sweep);
  VerdictReport rep;
  rep.kind = "fourth_moment";
  rep.target = TargetLaw::Normal;
  rep.tolerance = spec.tolerance;
  rep.terminal_threshold = spec.terminal_threshold;
  SequenceSpec normal = spec;
  normal.target = TargetLaw::Normal;
  int d = 0;
  for (std::uint64_t size : spec.sweep) {
    const auto f = point_kernel(spec, size, 1.0);
    d = f.order();
    SweepPoint p;
    p.size = size;
    p.order = d;
    p.dimension = f.dimension();
    p.fourth_moment = gaussian_fourth_moment(f);
    for (int r = 1; r < d; ++r) p.contraction_norms.push_back(contraction_norm(f, r));
    p.max_influence = influence_profile(f).max;
    p.ks = point_ks(f, normal);
    rep.points.push_back(std::move(p));
  }
  rep.statistics.push_back(judge_statistic(
      "fourth_moment_gap", column(rep.points, [](const SweepPoint& p) { return *p.fourth_moment - 3.0; }),
      spec.tolerance, spec.terminal_threshold));
  for (int r = 1; r < d; ++r) {
    rep.statistics.push_back(judge_statistic(
        "contraction_" + std::to_string(r),
        column(rep.points, [r](const SweepPoint& p) { return p.contraction_norms[static_cast<std::size_t>(r - 1)]; }),
        spec.tolerance, spec.terminal_threshold));
  }
  rep.statistics.push_back(judge_statistic("max_influence",
                                           column(rep.points, [](const SweepPoint& p) { return p.max_influence; }),
                                           spec.tolerance, spec.terminal_threshold));
  finish(rep);
  return rep;
}

VerdictReport chi_square_diagnostic(const SequenceSpec& spec, int nu) {
  if (nu < 1) throw Error(ErrorCode::InvalidDegrees, "degrees of freedom must be >= 1");
  const int d = spec.family.order;
  if (d < 2 || d % 2 != 0) throw Error(ErrorCode::OddOrder, "chi-square diagnostic needs an even order");
  require_sweep(spec.sweep);
  VerdictReport rep;
  rep.kind = "chi_square";
  rep.target = TargetLaw::ChiSquare;
  rep.nu = nu;
  rep.tolerance = spec.tolerance;
  rep.terminal_threshold = spec.terminal_threshold;
  SequenceSpec chi = spec;
  chi.target = TargetLaw::ChiSquare;
  chi.nu = nu;
  for (std::uint64_t size : spec.sweep) {
    const auto f = point_kernel(spec, size, 2.0 * nu);
    SweepPoint p;
    p.size = size;
    p.order = f.order();
    p.dimension = f.dimension();
    for (int r = 1; r < d; ++r) p.contraction_norms.push_back(contraction_norm(f, r));
    p.chi_square_defect = chi_square_defect(f, spec.contraction);
    p.max_influence = influence_profile(f).max;
    p.ks = point_ks(f, chi);
    rep.points.push_back(std::move(p));
  }
  rep.statistics.push_back(judge_statistic("chi_square_defect",
                                           column(rep.points, [](const SweepPoint& p) { return *p.chi_square_defect; }),
                                           spec.tolerance, spec.terminal_threshold));
  for (int r = 1; r < d; ++r) {
    if (2 * r == d) continue;
    rep.statistics.push_back(judge_statistic(
        "contraction_" + std::to_string(r),
        column(rep.points, [r](const SweepPoint& p) { return p.contraction_norms[static_cast<std::size_t>(r - 1)]; }),
        spec.tolerance, spec.terminal_threshold));
  }
  finish(rep);
  return rep;
}

MomentEstimate estimate_moment(const SymmetricKernel& f, const DistributionSpec& dist, int k,
                               const SampleSummary* samples) {
  if (k < 1 || k > 4) throw Error(ErrorCode::ParameterOutOfRange, "moment order must lie in [1, 4]");
  if (dist.law() == Law::Gaussian) {
    const double v = gaussian_second_moment(f);
    switch (k) {
      case 1: return {0.0, 0.0, Exactness::Exact, "gaussian_identity"};
      case 2: return {v, 0.0, Exactness::Exact, "gaussian_identity"};
      case 3: return {gaussian_third_moment(f), 0.0, Exactness::Exact, "gaussian_identity"};
      default:
        try {
          const double m4 = std::fabs(v - 1.0) <= kNormalizationTolerance ? gaussian_fourth_moment(f)
                                                                          : 3.0 * v * v + gaussian_fourth_cumulant(f);
          return {m4, 0.0, Exactness::Exact, "gaussian_identity"};
        } catch (const Error& e) {
          if (e.code() != ErrorCode::MaterializationTooLarge) throw;
        }
    }
  }
  if (dist.law() == Law::Rademacher) {
    try {
      return {exact_rademacher_distribution(f).moment(k), 0.0, Exactness::Exact, "rademacher_enumeration"};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EnumerationTooLarge) throw;
    }
  }
  if (samples == nullptr || samples->n == 0) {
    throw Error(ErrorCode::ParameterOutOfRange, "moment needs Monte Carlo samples");
  }
  const auto& m = samples->moments[static_cast<std::size_t>(k - 1)];
  return {m.value, m.std_error, Exactness::MonteCarlo, "monte_carlo"};
}

VerdictReport de_jong_report(const SymmetricKernel& f, const DistributionSpec& dist, const SampleConfig& config,
                             const DeJongOptions& options) {
  VerdictReport rep;
  rep.kind = "de_jong";
  rep.target = TargetLaw::Normal;
  rep.terminal_threshold = options.threshold;

  std::optional<SampleSummary> samples;
  if (config.n > 0) samples = sample_sums(f, dist, config);

  DeJongSummary dj;
  dj.law = dist.name();
  dj.fourth_moment = estimate_moment(f, dist, 4, samples ? &*samples : nullptr);
  dj.max_influence = influence_profile(f).max;
  if (samples) {
    dj.ks = ks_normal(*samples);
    dj.dkw_band = dkw_band(samples->n);
  }
  dj.fourth_moment_close = std::fabs(dj.fourth_moment.value - 3.0) < options.threshold;
  dj.influence_small = dj.max_influence < options.threshold;
  MomentProfile profile{dist.abs_third_moment(), dist.fourth_moment()};
  profile.beta3 = std::max(profile.beta3, 1.0);
  profile.beta4 = std::max(profile.beta4, 1.0);
  dj.smooth_bound = normal_smooth_bound(f, profile, options.budget, dj.fourth_moment, options.contraction);
  dj.wasserstein = wasserstein_bound(f, profile, dj.fourth_moment);

  SweepPoint p;
  p.size = f.dimension();
  p.order = f.order();
  p.dimension = f.dimension();
  p.fourth_moment = dj.fourth_moment.value;
  p.max_influence = dj.max_influence;
  if (dj.ks) p.ks.push_back({dj.law, *dj.ks});
  rep.points.push_back(std::move(p));

  if (!dj.fourth_moment_close) rep.flagged.push_back("fourth_moment_gap");
  if (!dj.influence_small) rep.flagged.push_back("max_influence");
  rep.verdict = dj.fourth_moment_close && dj.influence_small;
  rep.de_jong = std::move(dj);
  return rep;
}

VerdictReport universality_experiment(const SequenceSpec& spec) {
  if (spec.laws.size() < 2) throw Error(ErrorCode::ParameterOutOfRange, "universality needs at least two laws");
  if (spec.sample.n == 0) throw Error(ErrorCode::ParameterOutOfRange, "universality needs a positive sample count");
  require_sweep(spec.sweep);
  if (spec.target == TargetLaw::ChiSquare && spec.nu < 1) {
    throw Error(ErrorCode::InvalidDegrees, "degrees of freedom must be >= 1");
  }
  VerdictReport rep;
  rep.kind = "universality";
  rep.target = spec.target;
  if (spec.target == TargetLaw::ChiSquare) rep.nu = spec.nu;
  rep.tolerance = spec.tolerance;
  rep.terminal_threshold = spec.terminal_threshold;
  const double variance = spec.target == TargetLaw::Normal ? 1.0 : 2.0 * spec.nu;
  for (std::uint64_t size : spec.sweep) {
    const auto f = point_kernel(spec, size, variance);
    SweepPoint p;
    p.size = size;
    p.order = f.order();
    p.dimension = f.dimension();
    p.max_influence = influence_profile(f).max;
    p.ks = point_ks(f, spec);
    rep.points.push_back(std::move(p));
  }
  const double band = dkw_band(spec.sample.n);
  rep.dkw_band = band;
  double lo = 1.0, hi = 0.0;
  for (std::size_t j = 0; j < spec.laws.size(); ++j) {
    auto values = column(rep.points, [j](const SweepPoint& p) { return p.ks[j].ks; });
    lo = std::min(lo, values.back());
    hi = std::max(hi, values.back());
    // KS values are judged on trend only; the terminal comparison is across laws.
    auto v = judge_statistic("ks_" + spec.laws[j].name(), std::move(values), spec.tolerance, 1.0);
    rep.statistics.push_back(std::move(v));
  }
  rep.terminal_ks_spread = hi - lo;
  const bool agree = hi - lo <= 3.0 * band;
  finish(rep);
  if (rep.verdict) rep.verdict = *rep.verdict && agree;
  if (!agree) rep.flagged.push_back("terminal_ks_agreement");
  return rep;
}

namespace {

double max_abs_difference(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) out = std::max(out, std::fabs(a[i][j] - b[i][j]));
  }
  return out;
}

double max_entry(const std::vector<std::vector<double>>& a) {
  double out = 0.0;
  for (const auto& row : a) {
    for (double x : row) out = std::max(out, std::fabs(x));
  }
  return out;
}

}  // namespace

VerdictReport multivariate_diagnostic(const MultivariateSpec& spec) {
  if (spec.kernels.empty()) throw Error(ErrorCode::ParameterOutOfRange, "no sweep points");
  const std::size_t m = spec.kernels.front().size();
  if (m == 0) throw Error(ErrorCode::ParameterOutOfRange, "sweep point without kernels");
  if (spec.covariance.size() != m) {
    throw Error(ErrorCode::InvalidCovariance, "covariance must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (spec.covariance[i].size() != m) throw Error(ErrorCode::InvalidCovariance, "covariance must be square");
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::isfinite(spec.covariance[i][j]) || spec.covariance[i][j] != spec.covariance[j][i]) {
        throw Error(ErrorCode::InvalidCovariance, "covariance must be finite and symmetric");
      }
    }
  }
  covariance_b_factor(spec.covariance);  // rejects indefinite V
  std::vector<std::uint64_t> sweep = spec.sweep;
  if (sweep.empty()) {
    for (std::size_t k = 0; k < spec.kernels.size(); ++k) sweep.push_back(k + 1);
  }
  if (sweep.size() != spec.kernels.size()) {
    throw Error(ErrorCode::ParameterOutOfRange, "sweep labels and kernel sets differ in length");
  }
  require_sweep(sweep);

  VerdictReport rep;
  rep.kind = "multivariate";
  rep.tolerance = spec.tolerance;
  rep.terminal_threshold = spec.terminal_threshold;
  int max_order = 0;
  for (std::size_t k = 0; k < spec.kernels.size(); ++k) {
    const auto& ks = spec.kernels[k];
    if (ks.size() != m) throw Error(ErrorCode::ParameterOutOfRange, "every sweep point needs the same kernel count");
    SweepPoint p;
    p.size = sweep[k];
    p.cross_moments.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      p.order = std::max(p.order, ks[i].order());
      p.dimension = std::max<std::uint64_t>(p.dimension, ks[i].dimension());
      for (std::size_t j = i; j < m; ++j) {
        p.cross_moments[i][j] = p.cross_moments[j][i] = gaussian_cross_moment(ks[i], ks[j]);
      }
      p.max_influence = std::max(p.max_influence, influence_profile(ks[i]).max);
    }
    max_order = std::max(max_order, p.order);
    p.contraction_norms.assign(static_cast<std::size_t>(std::max(p.order - 1, 0)), 0.0);
    for (const auto& f : ks) {
      for (int r = 1; r < f.order(); ++r) {
        auto& slot = p.contraction_norms[static_cast<std::size_t>(r - 1)];
        slot = std::max(slot, contraction_norm(f, r));
      }
    }
    p.delta = delta_matrix(ks);
    p.covariance_residual = max_abs_difference(p.cross_moments, spec.covariance);
    if (spec.sample.n > 0) {
      for (const auto& law : spec.laws) {
        const auto s = sample_vector_sums(ks, law, spec.sample);
        const auto ref = sample_gaussian_vectors(spec.covariance, spec.sample.n, spec.sample.seed ^ 0x9e3779b97f4a7c15ULL);
        p.ks.push_back({law.name(), joint_ks_two_sample(s.joint, ref, m)});
      }
      if (!p.ks.empty()) p.joint_ks = p.ks.front().ks;
    }
    rep.points.push_back(std::move(p));
  }

  auto residuals = column(rep.points, [](const SweepPoint& p) { return *p.covariance_residual; });
  rep.statistics.push_back(judge_statistic("covariance_residual", std::move(residuals), spec.tolerance,
                                           spec.terminal_threshold));
  rep.statistics.push_back(judge_statistic("max_delta",
                                           column(rep.points, [](const SweepPoint& p) { return max_entry(p.delta); }),
                                           spec.tolerance, spec.terminal_threshold));
  for (int r = 1; r < max_order; ++r) {
    rep.statistics.push_back(judge_statistic(
        "contraction_" + std::to_string(r), column(rep.points, [r](const SweepPoint& p) {
          const auto idx = static_cast<std::size_t>(r - 1);
          return idx < p.contraction_norms.size() ? p.contraction_norms[idx] : 0.0;
        }),
        spec.tolerance, spec.terminal_threshold));
  }
  finish(rep);
  return rep;
}

}  // namespace homsum
