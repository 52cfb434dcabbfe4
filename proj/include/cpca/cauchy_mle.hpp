#pragma once

#include "cpca/types.hpp"

namespace cpca {

// n log(sigma/pi) - sum_i log(sigma^2 + (c_i - mu)^2).
double cauchy_loglik(const CauchyParams& params, const Vector& c);

// Weighted form: W log(sigma/pi) - sum_i w_i log(...), W = sum w_i. With unit
// weights this reduces to cauchy_loglik; the finite-epsilon influence oracle
// uses fractional weights.
double cauchy_loglik_weighted(const CauchyParams& params, const Vector& c,
                              const Vector& weights);

struct ScoreHessian {
  Eigen::Vector2d score;    // (d/dmu, d/dsigma)
  Eigen::Matrix2d hessian;  // second derivatives in (mu, sigma)
};

ScoreHessian cauchy_score_and_hessian(const CauchyParams& params, const Vector& c);
ScoreHessian cauchy_score_and_hessian_weighted(const CauchyParams& params,
                                               const Vector& c, const Vector& weights);

struct CauchyFit {
  CauchyParams params;
  int iterations = 0;
};

// Maximum-likelihood location/scale fit by damped Newton-Raphson.
// Start: mu = median(c), sigma = IQR(c)/2 (linear-interpolation quantiles);
// each step is halved until the log-likelihood does not decrease, and sigma
// never drops below half its current value in one step. Converged when
// ||score||_inf <= 1e-9 * W. The Cauchy likelihood has a unique maximum for
// n >= 3 non-degenerate samples, so the converged point is the global MLE.
// Throws DEGENERATE_SAMPLE (all values equal, or n < 3) and
// FAILED_CONVERGENCE (200 iterations exhausted).
CauchyFit fit_cauchy(const Vector& c);
CauchyFit fit_cauchy_weighted(const Vector& c, const Vector& weights);

// Warm-started variant (used when refitting after a small perturbation).
CauchyFit fit_cauchy_weighted_from(const Vector& c, const Vector& weights,
                                   const CauchyParams& start);

}  // namespace cpca
