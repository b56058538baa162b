#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homsum/contraction.hpp"
#include "homsum/kernel.hpp"

namespace homsum {

/// Derivative budget of a univariate test function phi.
struct TestFunctionBudget {
  double a = 0.0;   // |phi'(0)|
  double b = 0.0;   // |phi''(0)|
  double b3 = 0.0;  // sup |phi'''|
};

/// Derivative budget of a multivariate test function.
struct MultiTestFunctionBudget {
  double b2m = 0.0;  // ||phi''||_inf
  double b3m = 0.0;  // ||phi'''||_inf
};

/// Moment bounds of the input sequence.
struct MomentProfile {
  double beta3 = 1.0;  // sup E|X_i|^3
  double beta4 = 1.0;  // sup E X_i^4
  double alpha() const noexcept { return beta4 > 3.0 ? beta4 : 3.0; }
};

enum class Exactness { Exact, UpperBound, MonteCarlo };
std::string_view to_string(Exactness e) noexcept;

/// A moment of Q(X) supplied to a bound, with its provenance.
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  Exactness source = Exactness::Exact;
  std::string method;  // e.g. "gaussian_identity", "rademacher_enumeration", "monte_carlo"
};

struct ValueWithExactness {
  double value = 0.0;
  Exactness exactness = Exactness::Exact;
};

/// Evaluated bound with every component that enters its total.
struct BoundReport {
  std::string kind;  // normal | chi2 | wasserstein | multivariate | convex
  int order = 0;
  std::optional<int> nu;

  std::optional<double> t1;
  std::optional<Exactness> t1_exactness;
  /// T2 and T4 use the exact Gaussian moments of Q(G); empty when the
  /// symmetrized contraction exceeds the materialization cap.
  std::optional<double> t2;
  std::optional<double> t3;
  std::optional<Exactness> t3_exactness;
  std::optional<double> t4;

  std::optional<double> c_star;
  std::optional<double> prefactor;
  std::optional<double> scale;
  std::optional<double> invariance;
  std::optional<double> moment_gap_term;
  std::optional<double> influence_term;
  std::optional<double> b1;
  std::optional<double> b2;
  std::optional<double> b_factor;
  std::optional<double> max_influence;
  std::optional<double> c_influence_sum;
  std::vector<std::vector<double>> delta;

  std::optional<MomentEstimate> eq3x;
  std::optional<MomentEstimate> eq4x;

  TestFunctionBudget budget;
  MultiTestFunctionBudget multi_budget;
  MomentProfile profile;

  /// Empty when the bound does not apply (Wasserstein threshold exceeded).
  std::optional<double> total;
  bool applicable = true;
};

// Constants and single quantities.

double c_star(const TestFunctionBudget& budget, int d);
/// sqrt((d-1)/(3d)).
double fourth_moment_scale(int d);

/// T1 from symmetrized contraction norms; falls back to unsymmetrized norms
/// (an upper bound) when symmetrization exceeds the cap.
ValueWithExactness t1(const SymmetricKernel& f, const ContractionOptions& opts = {});
double t2(const SymmetricKernel& f, double ef4);
ValueWithExactness t3(const SymmetricKernel& f, int nu, const ContractionOptions& opts = {});
double t4(double ef3, double ef4, int nu, int d);

double invariance_bound(const SymmetricKernel& f, double beta3, double b3);

/// Bracketed influence term of the normal bounds: 4 sqrt2 144^{d-1/2} alpha^{d/2} sqrt(d) d! maxInf^{1/4}.
double normal_influence_term(int d, double alpha, double max_influence);
/// Influence term of the chi-square bound.
double chi_square_influence_term(int d, int nu, double alpha, double max_influence);
/// max{sqrt(2 pi / nu), 1/nu + 2/nu^2}.
double chi_square_prefactor(int nu);

// Totals as functions of report components; reports are built with these so
// a serialized report can be re-totaled bit for bit.

double smooth_total(double invariance, double prefactor, double scale, double gap, double influence);
double wasserstein_b2(double prefactor, double scale, double gap, double influence);
double wasserstein_threshold();
std::optional<double> wasserstein_total(double b1, double b2);
double multivariate_total(const std::vector<std::vector<double>>& delta, double b2m, double b3m,
                          double c_influence_sum, double prefactor, double max_influence);
double convex_b1(const std::vector<std::vector<double>>& delta);
double convex_b2(double c_influence_sum, double prefactor, double max_influence);
double convex_total(double b1, double b2, double b_factor, std::size_t m);

// Full bounds.

BoundReport normal_smooth_bound(const SymmetricKernel& f, const MomentProfile& profile,
                                const TestFunctionBudget& budget, const MomentEstimate& eq4x,
                                const ContractionOptions& opts = {});

BoundReport wasserstein_bound(const SymmetricKernel& f, const MomentProfile& profile, const MomentEstimate& eq4x);

/// Wasserstein components from summary statistics alone (order, influence, E Q^4).
BoundReport wasserstein_bound_from_statistics(int d, double max_influence, const MomentProfile& profile,
                                              const MomentEstimate& eq4x);

BoundReport chi_square_smooth_bound(const SymmetricKernel& f, const MomentProfile& profile,
                                    const TestFunctionBudget& budget, int nu, const MomentEstimate& eq3x,
                                    const MomentEstimate& eq4x, const ContractionOptions& opts = {});

/// Delta_ij of the multivariate bound; requires order(fi) <= order(fj).
double delta_ij(const SymmetricKernel& fi, const SymmetricKernel& fj);

/// Delta matrix over kernels (upper triangle filled symmetrically).
std::vector<std::vector<double>> delta_matrix(const std::vector<SymmetricKernel>& kernels);

/// C = sum over indices of the maximal influence across kernels.
double influence_cover(const std::vector<SymmetricKernel>& kernels);

BoundReport multivariate_smooth_bound(const std::vector<SymmetricKernel>& kernels, const MomentProfile& profile,
                                      const MultiTestFunctionBudget& budget);

/// Kolmogorov-type bound over convex sets. With no covariance given, V is
/// taken as the Gaussian covariance of the kernels.
BoundReport convex_sets_bound(const std::vector<SymmetricKernel>& kernels, const MomentProfile& profile,
                              const std::optional<std::vector<std::vector<double>>>& covariance = std::nullopt);

/// b = max |(Lambda^{-1/2} B^T)_{ij}| over the nonzero spectrum of V.
double covariance_b_factor(const std::vector<std::vector<double>>& covariance);

}  // namespace homsum
