#pragma once

#include "cpca/cauchy_mle.hpp"
#include "cpca/types.hpp"

namespace cpca {

struct ClassicalIfResult {
  Vector if_vector;          // lives in the orthogonal complement of u_hat
  double if_eigenvalue = 0;  // ((z-mu).u)^2 - lambda
};

// Sensitivity of the leading classical eigenvector/eigenvalue to a point mass
// at z: if_vector = -((z-mu).u) (Sigma - lambda I)^+ (z-mu). Throws
// MULTIPLICITY when the leading eigenvalue is not simple (relative gap 1e-8).
ClassicalIfResult classical_if(const Vector& z, const CovarianceModel& model);

// Partial derivatives of g(c, theta) = log(sigma/pi) - log(sigma^2 + (c-mu)^2),
// the per-observation log-likelihood, evaluated at one projection value.
struct GBarDerivatives {
  double g_c = 0, g_mu = 0, g_sigma = 0;
  double g_cc = 0;
  Eigen::Vector2d g_c_theta = Eigen::Vector2d::Zero();      // (g_c_mu, g_c_sigma)
  Eigen::Matrix2d g_theta_theta = Eigen::Matrix2d::Zero();  // (mu, sigma) Hessian
};

GBarDerivatives gbar_derivatives(double c, const CauchyParams& params);

// The A/b assembly appears in two published-looking forms that disagree in
// one term; both are implemented and the finite-epsilon oracle picks the
// default (see cauchy_if):
//  - kProjected: identity scalar int g_c(x) (u.x) dF, b fully projected onto
//    the orthogonal complement of u_hat with the Fisher correction subtracted.
//    This is the assembly a from-scratch derivative computation produces.
//  - kUnprojected: identity scalar int g_c_mu(x) (x.u) dF, b = g_c(z) z +
//    C I_F^{-1} g_theta(z) left unprojected.
enum class CauchyIfVariant { kProjected, kUnprojected };

inline constexpr CauchyIfVariant kDefaultCauchyIfVariant = CauchyIfVariant::kProjected;

struct CauchyIfResult {
  Matrix a_matrix;
  Vector b_vector;
  Vector if_vector;  // A^{-1} b; empty when singular_a is set
  Eigen::Matrix2d fisher;  // raw Hessian integral int g_theta_theta dF
                           // (negative definite at the MLE; -fisher is the
                           // positive-definite information matrix)
  bool singular_a = false;
  bool singular_fisher = false;
};

// Analytic influence of a point mass at z on the first Cauchy direction,
// evaluated at the empirical distribution of X's rows. (u_hat, params) must be
// a converged fit on X. Singular A / Fisher (condition > 1e12) set flags
// rather than throw; if_vector is then left empty.
CauchyIfResult cauchy_if(const Vector& z, const DataMatrix& X, const Vector& u_hat,
                         const CauchyParams& params,
                         CauchyIfVariant variant = kDefaultCauchyIfVariant);

enum class IfEstimator { kClassical, kCauchy };

// Finite-epsilon influence: refit on the contaminated empirical distribution
// (weight (1-eps)/n per row, eps on z) and return (u_eps - u)/eps with u_eps
// sign-aligned to u. Requires 0 < eps <= 0.05.
Vector empirical_if(const Vector& z, const DataMatrix& X, IfEstimator estimator,
                    double eps);

// First-order Richardson extrapolation: 2 IF(eps/2) - IF(eps), cancelling the
// O(eps) bias of the one-sided difference.
Vector empirical_if_richardson(const Vector& z, const DataMatrix& X,
                               IfEstimator estimator, double eps);

// The converged unweighted Cauchy fit empirical_if uses as its base point;
// exposed so analytic and empirical evaluations can share one fit.
struct CauchyDirectionFit {
  Vector u_hat;
  CauchyParams params;
};

CauchyDirectionFit tight_cauchy_direction_fit(const DataMatrix& X);

}  // namespace cpca
