#include "cpca/cauchy_mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cpca {

namespace {

void check_sample(const Vector& c, const Vector& weights) {
  if (c.size() < 3) {
    throw CpcaError(ErrorCode::kDegenerateSample,
                    "need at least 3 projected values for a Cauchy fit");
  }
  if (!c.allFinite()) throw std::invalid_argument("projections contain non-finite values");
  if (weights.size() != c.size()) throw std::invalid_argument("weight length mismatch");
  double lo = 0, hi = 0;
  bool seen = false;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("weights must be nonnegative");
    if (weights[i] == 0.0) continue;
    if (!seen) {
      lo = hi = c[i];
      seen = true;
    } else {
      lo = std::min(lo, c[i]);
      hi = std::max(hi, c[i]);
    }
  }
  if (!seen || hi == lo) {
    throw CpcaError(ErrorCode::kDegenerateSample,
                    "all projected values identical; scale would be zero");
  }
}

// Linear-interpolation quantile on a sorted copy (the common "type 7" rule).
double quantile7(std::vector<double> sorted, double q) {
  double h = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

CauchyParams initial_params(const Vector& c) {
  std::vector<double> sorted(c.data(), c.data() + c.size());
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[(sorted.size() - 1) / 2];
  double sigma0 = (quantile7(sorted, 0.75) - quantile7(sorted, 0.25)) / 2.0;
  if (!(sigma0 > 0.0)) {
    // more than half the sample ties at the median; fall back to the mean
    // absolute deviation, which is positive whenever the sample has any spread
    double mad = 0.0;
    for (double v : sorted) mad += std::abs(v - median);
    sigma0 = mad / static_cast<double>(sorted.size());
  }
  return {median, sigma0};
}

}  // namespace

double cauchy_loglik(const CauchyParams& params, const Vector& c) {
  const double s2 = params.sigma * params.sigma;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    double d = c[i] - params.mu;
    sum += std::log(s2 + d * d);
  }
  return static_cast<double>(c.size()) * std::log(params.sigma / M_PI) - sum;
}

double cauchy_loglik_weighted(const CauchyParams& params, const Vector& c,
                              const Vector& weights) {
  const double s2 = params.sigma * params.sigma;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    double d = c[i] - params.mu;
    sum += weights[i] * std::log(s2 + d * d);
  }
  return weights.sum() * std::log(params.sigma / M_PI) - sum;
}

ScoreHessian cauchy_score_and_hessian_weighted(const CauchyParams& params,
                                               const Vector& c, const Vector& weights) {
  const double sigma = params.sigma;
  const double s2 = sigma * sigma;
  double s_mu = 0, s_sigma = 0, h_mm = 0, h_ms = 0, h_ss = 0, wsum = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double w = weights[i];
    const double d = c[i] - params.mu;
    const double den = s2 + d * d;
    const double den2 = den * den;
    wsum += w;
    s_mu += w * 2.0 * d / den;
    s_sigma -= w * 2.0 * sigma / den;
    h_mm += w * 2.0 * (d * d - s2) / den2;
    h_ms += w * -4.0 * d * sigma / den2;
    h_ss += w * 2.0 * (s2 - d * d) / den2;
  }
  ScoreHessian out;
  out.score << s_mu, wsum / sigma + s_sigma;
  out.hessian << h_mm, h_ms, h_ms, -wsum / s2 + h_ss;
  return out;
}

ScoreHessian cauchy_score_and_hessian(const CauchyParams& params, const Vector& c) {
  return cauchy_score_and_hessian_weighted(params, c, Vector::Ones(c.size()));
}

CauchyFit fit_cauchy_weighted_from(const Vector& c, const Vector& weights,
                                   const CauchyParams& start) {
  check_sample(c, weights);
  if (!start.valid()) throw std::invalid_argument("invalid starting parameters");

  const double wsum = weights.sum();
  const double score_tol = 1e-9 * wsum;
  double mu = start.mu;
  double sigma = start.sigma;
  double ll = cauchy_loglik_weighted({mu, sigma}, c, weights);

  for (int iter = 0; iter < 200; ++iter) {
    ScoreHessian sh = cauchy_score_and_hessian_weighted({mu, sigma}, c, weights);
    if (sh.score.cwiseAbs().maxCoeff() <= score_tol) {
      return {{mu, sigma}, iter};
    }

    Eigen::Vector2d step;
    double det = sh.hessian(0, 0) * sh.hessian(1, 1) - sh.hessian(0, 1) * sh.hessian(1, 0);
    if (std::abs(det) > 1e-300) {
      step = -sh.hessian.inverse() * sh.score;
    }
    // Newton can point downhill away from the optimum (indefinite Hessian);
    // fall back to a conservative ascent step when it does.
    if (std::abs(det) <= 1e-300 || step.dot(sh.score) <= 0.0) {
      step = sh.score * (0.25 * sigma / sh.score.cwiseAbs().maxCoeff());
    }

    double t = 1.0;
    if (sigma + step[1] < 0.5 * sigma) t = -0.5 * sigma / step[1];

    // "Does not decrease" up to the rounding noise of evaluating the
    // log-likelihood itself; without the allowance the damping loop rejects
    // every step once the true per-step gain falls below that noise, and the
    // score stalls just above its tolerance.
    const double ll_noise = std::numeric_limits<double>::epsilon() *
                            (std::abs(ll) + 8.0 * static_cast<double>(c.size()));
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      double mu2 = mu + t * step[0];
      double sigma2 = sigma + t * step[1];
      double ll2 = cauchy_loglik_weighted({mu2, sigma2}, c, weights);
      if (ll2 >= ll - ll_noise) {
        mu = mu2;
        sigma = sigma2;
        ll = ll2;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      throw CpcaError(ErrorCode::kFailedConvergence,
                      "Cauchy fit line search stalled before reaching the score tolerance");
    }
  }
  throw CpcaError(ErrorCode::kFailedConvergence,
                  "Cauchy fit did not reach the score tolerance in 200 iterations");
}

CauchyFit fit_cauchy_weighted(const Vector& c, const Vector& weights) {
  check_sample(c, weights);
  return fit_cauchy_weighted_from(c, weights, initial_params(c));
}

CauchyFit fit_cauchy(const Vector& c) {
  return fit_cauchy_weighted(c, Vector::Ones(c.size()));
}

}  // namespace cpca
