#pragma once

#include <utility>
#include <vector>

#include "homsum/contraction.hpp"
#include "homsum/kernel.hpp"

namespace homsum {

/// Probabilists' Hermite polynomial H_q(x) via H_{q+1} = x H_q - q H_{q-1}.
double hermite(int q, double x);

struct ChiSquareMoments {
  double second = 0.0;
  double third = 0.0;
  double fourth = 0.0;
};

/// Moments 2-4 of the centered chi-square law with nu degrees of freedom.
ChiSquareMoments chi_square_moments(int nu);

/// E[Q(G)^2] = d! ||f||^2.
double gaussian_second_moment(const SymmetricKernel& f);

/// E[Q_f(G) Q_g(G)]: d! times the ordered inner product for equal orders, 0 otherwise.
double gaussian_cross_moment(const SymmetricKernel& f, const SymmetricKernel& g);

/// Exact E[Q(G)^4] from symmetrized contraction norms; requires d! ||f||^2 = 1.
double gaussian_fourth_moment(const SymmetricKernel& f, const ContractionOptions& opts = {});

/// E[Q(G)^4] - 3 (E[Q(G)^2])^2 for any scaling of f.
double gaussian_fourth_cumulant(const SymmetricKernel& f, const ContractionOptions& opts = {});

/// Exact E[Q(G)^3] = d! (d/2)! binom(d, d/2)^2 <f, f *_{d/2} f>; zero for odd d.
double gaussian_third_moment(const SymmetricKernel& f);

/// Tolerance used when checking variance normalizations.
inline constexpr double kNormalizationTolerance = 1e-9;

/// Finite discrete law with sorted distinct atoms.
class ExactDistribution {
 public:
  using Atom = std::pair<double, double>;  // (value, probability)

  explicit ExactDistribution(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double moment(int k) const;
  double abs_moment(double q) const;
  /// P(X <= x).
  double cdf(double x) const;

 private:
  std::vector<Atom> atoms_;
};

/// Largest number of active variables handled by exact enumeration.
inline constexpr int kMaxEnumerationVariables = 22;

/// Exact law of Q(f, eps) for i.i.d. Rademacher signs. Only indices that occur
/// in some entry are enumerated; at most kMaxEnumerationVariables of them.
ExactDistribution exact_rademacher_distribution(const SymmetricKernel& f);

struct HypercontractivityResult {
  bool holds = true;
  double bound = 0.0;
  /// bound - moment_q; negative values within the allowed statistical error still hold.
  double slack = 0.0;
};

/// E|Q|^q <= gamma^d (2 sqrt(q-1))^{qd} E[Q^2]^{q/2} with gamma = sup E|X_i|^q.
/// `moment_error` widens the acceptance for Monte Carlo estimates.
HypercontractivityResult hypercontractivity_check(double moment_q, double moment_2, double q, int d, double gamma,
                                                  double moment_error = 0.0);

/// Gaussian chaos form: E|F|^q <= (q-1)^{qd/2} E[F^2]^{q/2}.
HypercontractivityResult gaussian_hypercontractivity_check(double moment_q, double moment_2, double q, int d,
                                                           double moment_error = 0.0);

/// c_{d,l,m,alpha} of the moment transfer bound.
double moment_transfer_constant(int d, int l, int m, double alpha);

/// Bound on |E Q(X)^l - E Q(Y)^l| when the input laws match up to order 2.
double moment_transfer_bound(int d, int l, int m, double alpha, double second_moment_root_bound,
                             double max_influence);

}  // namespace homsum
