#include "homsum/bounds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "homsum/error.hpp"
#include "homsum/moments.hpp"
#include "homsum/numeric.hpp"

namespace homsum {

std::string_view to_string(Exactness e) noexcept {
  switch (e) {
    case Exactness::Exact: return "exact";
    case Exactness::UpperBound: return "upper_bound";
    case Exactness::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

namespace {

void require_variance(const SymmetricKernel& f, double target, ErrorCode code) {
  const double variance = gaussian_second_moment(f);
  if (std::fabs(variance - target) > kNormalizationTolerance * std::max(1.0, target)) {
    throw Error(code, "kernel has d!||f||^2 = " + std::to_string(variance) + ", expected " + std::to_string(target));
  }
}

void require_even(int d) {
  if (d < 2 || d % 2 != 0) throw Error(ErrorCode::OddOrder, "order must be even and >= 2, got " + std::to_string(d));
}

void require_nu(int nu) {
  if (nu < 1) throw Error(ErrorCode::InvalidDegrees, "degrees of freedom must be >= 1");
}

void require_budget(const TestFunctionBudget& budget) {
  if (budget.a < 0 || budget.b < 0 || budget.b3 < 0) {
    throw Error(ErrorCode::ParameterOutOfRange, "budget entries must be nonnegative");
  }
}

void require_profile(const MomentProfile& profile) {
  if (!(profile.beta3 >= 1.0) || !(profile.beta4 >= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "moment profile needs beta3 >= 1 and beta4 >= 1");
  }
}

// (r-1)!^2 binom(d-1, r-1)^4 (2d-2r)!, the weight of ||f ~*_r f||^2 in T1 and T3.
double t_weight(int d, int r) {
  const double b = binomial(d - 1, r - 1);
  const double g = factorial(r - 1);
  return g * g * b * b * b * b * factorial(2 * d - 2 * r);
}

struct NormChoice {
  double norm;
  bool exact;
};

NormChoice symmetrized_or_upper(const SymmetricKernel& f, int r, const ContractionOptions& opts) {
  try {
    return {symmetrized_contraction_norm(f, r, opts), true};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MaterializationTooLarge) throw;
    return {contraction_norm(f, r), false};
  }
}

}  // namespace

double c_star(const TestFunctionBudget& budget, int d) {
  require_budget(budget);
  const double lead = 4.0 * std::numbers::sqrt2 * (1.0 + std::pow(5.0, 1.5 * d));
  const double first = 1.5 * budget.b + budget.b3 / 3.0 * (2.0 * std::numbers::sqrt2 / std::sqrt(std::numbers::pi));
  const double second = 2.0 * budget.a + budget.b3 / 3.0;
  return lead * std::max(first, second);
}

double fourth_moment_scale(int d) { return std::sqrt((d - 1.0) / (3.0 * d)); }

ValueWithExactness t1(const SymmetricKernel& f, const ContractionOptions& opts) {
  const int d = f.order();
  require_variance(f, 1.0, ErrorCode::NotNormalized);
  CompensatedSum acc;
  bool exact = true;
  for (int r = 1; r <= d - 1; ++r) {
    const auto [norm, is_exact] = symmetrized_or_upper(f, r, opts);
    exact = exact && is_exact;
    acc.add(t_weight(d, r) * norm * norm);
  }
  return {std::sqrt(static_cast<double>(d) * d * acc.value()), exact ? Exactness::Exact : Exactness::UpperBound};
}

double t2(const SymmetricKernel& f, double ef4) {
  require_variance(f, 1.0, ErrorCode::NotNormalized);
  return fourth_moment_scale(f.order()) * std::sqrt(std::fabs(ef4 - 3.0));
}

ValueWithExactness t3(const SymmetricKernel& f, int nu, const ContractionOptions& opts) {
  const int d = f.order();
  require_even(d);
  require_nu(nu);
  require_variance(f, 2.0 * nu, ErrorCode::NotNormalizedToTwoNu);
  const double c = chi_square_constant(d);
  bool exact = true;
  // ||f - c^{-1} f ~*_{d/2} f|| = defect / c. When symmetrization is out of
  // reach, ||f|| + c^{-1} ||f *_{d/2} f|| bounds it from above.
  double critical = 0.0;
  try {
    critical = chi_square_defect(f, opts) / c;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MaterializationTooLarge) throw;
    critical = std::sqrt(f.squared_norm()) + contraction_norm(f, d / 2) / c;
    exact = false;
  }
  CompensatedSum acc;
  acc.add(4.0 * factorial(d) * critical * critical);
  for (int r = 1; r <= d - 1; ++r) {
    if (2 * r == d) continue;
    const auto [norm, is_exact] = symmetrized_or_upper(f, r, opts);
    exact = exact && is_exact;
    acc.add(static_cast<double>(d) * d * t_weight(d, r) * norm * norm);
  }
  return {std::sqrt(acc.value()), exact ? Exactness::Exact : Exactness::UpperBound};
}

double t4(double ef3, double ef4, int nu, int d) {
  require_even(d);
  require_nu(nu);
  const double v = nu;
  return fourth_moment_scale(d) * std::sqrt(std::fabs(ef4 - 12.0 * ef3 - 12.0 * v * v + 48.0 * v));
}

double invariance_bound(const SymmetricKernel& f, double beta3, double b3) {
  if (!(beta3 >= 1.0) || !(b3 >= 0.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "invariance bound needs beta >= 1 and B3 >= 0");
  }
  const int d = f.order();
  return b3 * std::pow(30.0 * beta3, d) * factorial(d) * std::sqrt(influence_profile(f).max);
}

double normal_influence_term(int d, double alpha, double max_influence) {
  return 4.0 * std::numbers::sqrt2 * std::pow(144.0, d - 0.5) * std::pow(alpha, d / 2.0) * std::sqrt(d) *
         factorial(d) * std::pow(max_influence, 0.25);
}

double chi_square_influence_term(int d, int nu, double alpha, double max_influence) {
  const double gauss_part = std::numbers::sqrt2 * std::pow(144.0, d - 0.5) * std::pow(alpha, d / 2.0);
  const double chi_part =
      std::sqrt(static_cast<double>(nu)) * std::pow(2.0 * std::numbers::sqrt2, 1.5 * (2 * d - 1)) * std::pow(alpha, 1.5 * d);
  return 4.0 * std::sqrt(d) * factorial(d) * (gauss_part + chi_part) * std::pow(max_influence, 0.25);
}

double chi_square_prefactor(int nu) {
  require_nu(nu);
  const double v = nu;
  return std::max(std::sqrt(2.0 * std::numbers::pi / v), 1.0 / v + 2.0 / (v * v));
}

double smooth_total(double invariance, double prefactor, double scale, double gap, double influence) {
  return invariance + prefactor * scale * (gap + influence);
}

double wasserstein_b2(double prefactor, double scale, double gap, double influence) {
  return prefactor * scale * (gap + influence);
}

double wasserstein_threshold() { return 3.0 / (4.0 * std::numbers::sqrt2); }

std::optional<double> wasserstein_total(double b1, double b2) {
  if (!(b1 + b2 <= wasserstein_threshold())) return std::nullopt;
  return 4.0 * std::cbrt(b1 + b2);
}

double multivariate_total(const std::vector<std::vector<double>>& delta, double b2m, double b3m,
                          double c_influence_sum, double prefactor, double max_influence) {
  double delta_sum = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    delta_sum += delta[i][i];
    for (std::size_t j = i + 1; j < delta.size(); ++j) delta_sum += 2.0 * delta[i][j];
  }
  return b2m * delta_sum + c_influence_sum * b3m * prefactor * std::sqrt(max_influence);
}

double convex_b1(const std::vector<std::vector<double>>& delta) {
  double b1 = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    b1 += 0.5 * delta[i][i];
    for (std::size_t j = i + 1; j < delta.size(); ++j) b1 += delta[i][j];
  }
  return b1;
}

double convex_b2(double c_influence_sum, double prefactor, double max_influence) {
  return c_influence_sum * prefactor * std::sqrt(max_influence);
}

double convex_total(double b1, double b2, double b_factor, std::size_t m) {
  return 8.0 * std::pow(b_factor * b_factor * b1 + b_factor * b_factor * b_factor * b2, 0.25) *
         std::pow(static_cast<double>(m), 0.375);
}

BoundReport normal_smooth_bound(const SymmetricKernel& f, const MomentProfile& profile,
                                const TestFunctionBudget& budget, const MomentEstimate& eq4x,
                                const ContractionOptions& opts) {
  require_profile(profile);
  require_variance(f, 1.0, ErrorCode::NotNormalized);
  const int d = f.order();
  const double max_inf = influence_profile(f).max;
  BoundReport rep;
  rep.kind = "normal";
  rep.order = d;
  rep.budget = budget;
  rep.profile = profile;
  rep.eq4x = eq4x;
  const auto t = t1(f, opts);
  rep.t1 = t.value;
  rep.t1_exactness = t.exactness;
  // T2 is a statistic of Q(G), whatever the input law behind eq4x.
  try {
    rep.t2 = t2(f, gaussian_fourth_moment(f, opts));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MaterializationTooLarge) throw;
  }
  rep.c_star = c_star(budget, d);
  rep.scale = fourth_moment_scale(d);
  rep.max_influence = max_inf;
  rep.invariance = invariance_bound(f, profile.beta4, budget.b3);
  rep.moment_gap_term = std::sqrt(std::fabs(eq4x.value - 3.0));
  rep.influence_term = normal_influence_term(d, profile.alpha(), max_inf);
  rep.total = smooth_total(*rep.invariance, *rep.c_star, *rep.scale, *rep.moment_gap_term, *rep.influence_term);
  return rep;
}

BoundReport wasserstein_bound_from_statistics(int d, double max_influence, const MomentProfile& profile,
                                              const MomentEstimate& eq4x) {
  require_profile(profile);
  if (d < 1 || d > kMaxOrder) throw Error(ErrorCode::ParameterOutOfRange, "order out of range");
  if (!(max_influence >= 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "max influence must be >= 0");
  BoundReport rep;
  rep.kind = "wasserstein";
  rep.order = d;
  rep.profile = profile;
  rep.eq4x = eq4x;
  rep.max_influence = max_influence;
  rep.scale = fourth_moment_scale(d);
  rep.prefactor = 12.0 * std::numbers::sqrt2 * (1.0 + std::pow(5.0, 1.5 * d));
  rep.moment_gap_term = std::sqrt(std::fabs(eq4x.value - 3.0));
  rep.influence_term = normal_influence_term(d, profile.alpha(), max_influence);
  rep.b1 = 2.0 * std::pow(30.0 * profile.beta4, d) * factorial(d) * std::sqrt(max_influence);
  rep.b2 = wasserstein_b2(*rep.prefactor, *rep.scale, *rep.moment_gap_term, *rep.influence_term);
  rep.total = wasserstein_total(*rep.b1, *rep.b2);
  rep.applicable = rep.total.has_value();
  return rep;
}

BoundReport wasserstein_bound(const SymmetricKernel& f, const MomentProfile& profile, const MomentEstimate& eq4x) {
  require_variance(f, 1.0, ErrorCode::NotNormalized);
  return wasserstein_bound_from_statistics(f.order(), influence_profile(f).max, profile, eq4x);
}

BoundReport chi_square_smooth_bound(const SymmetricKernel& f, const MomentProfile& profile,
                                    const TestFunctionBudget& budget, int nu, const MomentEstimate& eq3x,
                                    const MomentEstimate& eq4x, const ContractionOptions& opts) {
  const int d = f.order();
  require_even(d);
  require_nu(nu);
  require_profile(profile);
  require_budget(budget);
  require_variance(f, 2.0 * nu, ErrorCode::NotNormalizedToTwoNu);
  const double max_inf = influence_profile(f).max;
  const double v = nu;
  BoundReport rep;
  rep.kind = "chi2";
  rep.order = d;
  rep.nu = nu;
  rep.budget = budget;
  rep.profile = profile;
  rep.eq3x = eq3x;
  rep.eq4x = eq4x;
  const auto t = t3(f, nu, opts);
  rep.t3 = t.value;
  rep.t3_exactness = t.exactness;
  try {
    const double variance = 2.0 * v;
    rep.t4 = t4(gaussian_third_moment(f), 3.0 * variance * variance + gaussian_fourth_cumulant(f, opts), nu, d);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MaterializationTooLarge) throw;
  }
  rep.prefactor = chi_square_prefactor(nu);
  rep.scale = fourth_moment_scale(d);
  rep.max_influence = max_inf;
  rep.invariance = invariance_bound(f, profile.beta4, budget.b3);
  rep.moment_gap_term = std::sqrt(std::fabs(eq4x.value - 12.0 * eq3x.value - 12.0 * v * v + 48.0 * v));
  rep.influence_term = chi_square_influence_term(d, nu, profile.alpha(), max_inf);
  rep.total = smooth_total(*rep.invariance, *rep.prefactor, *rep.scale, *rep.moment_gap_term, *rep.influence_term);
  return rep;
}

double delta_ij(const SymmetricKernel& fi, const SymmetricKernel& fj) {
  const int di = fi.order();
  const int dj = fj.order();
  if (di > dj) throw Error(ErrorCode::OrderMismatch, "delta_ij needs order(f_i) <= order(f_j)");
  CompensatedSum acc;
  for (int r = 1; r <= di - 1; ++r) {
    const double weight = factorial(r - 1) * binomial(di - 1, r - 1) * binomial(dj - 1, r - 1) *
                          std::sqrt(factorial(di + dj - 2 * r));
    acc.add(weight * (contraction_norm(fi, di - r) + contraction_norm(fj, dj - r)));
  }
  double value = dj / std::numbers::sqrt2 * acc.value();
  if (di < dj) value += std::sqrt(factorial(dj) * binomial(dj, di) * contraction_norm(fj, dj - di));
  return value;
}

std::vector<std::vector<double>> delta_matrix(const std::vector<SymmetricKernel>& kernels) {
  const std::size_t m = kernels.size();
  std::vector<std::vector<double>> delta(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const bool ordered = kernels[i].order() <= kernels[j].order();
      const double v = ordered ? delta_ij(kernels[i], kernels[j]) : delta_ij(kernels[j], kernels[i]);
      delta[i][j] = v;
      delta[j][i] = v;
    }
  }
  return delta;
}

double influence_cover(const std::vector<SymmetricKernel>& kernels) {
  std::vector<double> best;
  for (const auto& f : kernels) {
    const auto p = influence_profile(f);
    if (best.size() < p.values.size()) best.resize(p.values.size(), 0.0);
    for (std::size_t i = 0; i < p.values.size(); ++i) best[i] = std::max(best[i], p.values[i]);
  }
  return compensated_sum(best);
}

namespace {

struct MultiCommon {
  std::vector<std::vector<double>> delta;
  double c_influence_sum = 0.0;
  double max_influence = 0.0;
  double prefactor = 0.0;
};

MultiCommon multi_common(const std::vector<SymmetricKernel>& kernels, const MomentProfile& profile) {
  if (kernels.empty()) throw Error(ErrorCode::ParameterOutOfRange, "at least one kernel is required");
  require_profile(profile);
  MultiCommon out;
  double degree_sum = 0.0;
  for (const auto& f : kernels) {
    if (f.order() < 2) throw Error(ErrorCode::ParameterOutOfRange, "multivariate bounds need orders >= 2");
    require_variance(f, 1.0, ErrorCode::NotNormalized);
    out.max_influence = std::max(out.max_influence, influence_profile(f).max);
    degree_sum += std::pow(16.0 * std::numbers::sqrt2 * profile.beta3, (f.order() - 1) / 3.0) * factorial(f.order());
  }
  out.delta = delta_matrix(kernels);
  out.c_influence_sum = influence_cover(kernels);
  out.prefactor = (profile.beta3 + std::sqrt(8.0 / std::numbers::pi)) * degree_sum * degree_sum * degree_sum;
  return out;
}

}  // namespace

BoundReport multivariate_smooth_bound(const std::vector<SymmetricKernel>& kernels, const MomentProfile& profile,
                                      const MultiTestFunctionBudget& budget) {
  if (budget.b2m < 0 || budget.b3m < 0) throw Error(ErrorCode::ParameterOutOfRange, "budget must be nonnegative");
  const auto common = multi_common(kernels, profile);
  BoundReport rep;
  rep.kind = "multivariate";
  rep.order = kernels.front().order();
  rep.profile = profile;
  rep.multi_budget = budget;
  rep.delta = common.delta;
  rep.c_influence_sum = common.c_influence_sum;
  rep.max_influence = common.max_influence;
  rep.prefactor = common.prefactor;
  rep.total = multivariate_total(rep.delta, budget.b2m, budget.b3m, common.c_influence_sum, common.prefactor,
                                 common.max_influence);
  return rep;
}

double covariance_b_factor(const std::vector<std::vector<double>>& covariance) {
  const auto m = static_cast<Eigen::Index>(covariance.size());
  if (m == 0) throw Error(ErrorCode::InvalidCovariance, "covariance matrix is empty");
  Eigen::MatrixXd v(m, m);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(covariance[i].size()) != m) {
      throw Error(ErrorCode::InvalidCovariance, "covariance matrix must be square");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      v(i, j) = covariance[i][j];
      scale = std::max(scale, std::fabs(v(i, j)));
    }
  }
  if (scale == 0.0) throw Error(ErrorCode::InvalidCovariance, "covariance matrix is zero");
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidCovariance, "covariance matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(v);
  const auto& lambda = solver.eigenvalues();
  const double tol = 1e-10 * std::max(scale, lambda.cwiseAbs().maxCoeff());
  double b = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (lambda(k) < -tol) throw Error(ErrorCode::InvalidCovariance, "covariance matrix has a negative eigenvalue");
    if (lambda(k) <= tol) continue;
    b = std::max(b, solver.eigenvectors().col(k).cwiseAbs().maxCoeff() / std::sqrt(lambda(k)));
  }
  return b;
}

BoundReport convex_sets_bound(const std::vector<SymmetricKernel>& kernels, const MomentProfile& profile,
                              const std::optional<std::vector<std::vector<double>>>& covariance) {
  const auto common = multi_common(kernels, profile);
  std::vector<std::vector<double>> v;
  if (covariance) {
    v = *covariance;
    if (v.size() != kernels.size()) throw Error(ErrorCode::InvalidCovariance, "covariance size differs from kernel count");
  } else {
    v.assign(kernels.size(), std::vector<double>(kernels.size(), 0.0));
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      for (std::size_t j = 0; j < kernels.size(); ++j) v[i][j] = gaussian_cross_moment(kernels[i], kernels[j]);
    }
  }
  bool identity = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) identity = identity && v[i][j] == (i == j ? 1.0 : 0.0);
  }
  BoundReport rep;
  rep.kind = "convex";
  rep.order = kernels.front().order();
  rep.profile = profile;
  rep.delta = common.delta;
  rep.c_influence_sum = common.c_influence_sum;
  rep.max_influence = common.max_influence;
  rep.prefactor = common.prefactor;
  rep.b_factor = identity ? 1.0 : covariance_b_factor(v);
  rep.b1 = convex_b1(common.delta);
  rep.b2 = convex_b2(common.c_influence_sum, common.prefactor, common.max_influence);
  rep.total = convex_total(*rep.b1, *rep.b2, *rep.b_factor, kernels.size());
  return rep;
}

}  // namespace homsum
