#include "cpca/cauchy_pca.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cpca/linalg.hpp"
#include "cpca/rng.hpp"

namespace cpca {

namespace {

Vector fixed_point_direction(const Matrix& X, const Vector& weights, const Vector& u,
                             const CauchyParams& params) {
  const double s2 = params.sigma * params.sigma;
  Vector c = X * u;
  Vector coef(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    double d = c[i] - params.mu;
    coef[i] = weights[i] * d / (s2 + d * d);
  }
  return X.transpose() * coef;
}

// Remove the span of `previous` from v and renormalize; empty result means the
// update collapsed onto already-fitted components.
bool project_out(Vector& v, const std::vector<UnitDirection>& previous) {
  for (const UnitDirection& prev : previous) {
    v -= prev.coords().dot(v) * prev.coords();
  }
  double norm = v.norm();
  if (norm <= 1e-14) return false;
  v /= norm;
  return true;
}

}  // namespace

UnitDirection fixed_point_update(const DataMatrix& X, const Vector& u,
                                 const CauchyParams& params) {
  Vector un =
      fixed_point_direction(X.values, Vector::Ones(X.values.rows()), u, params);
  if (un.norm() <= 1e-14) {
    throw CpcaError(ErrorCode::kZeroUpdate,
                    "fixed-point update vanished (degenerate stationary configuration)");
  }
  return UnitDirection::normalized(un);
}

Vector fixed_point_update_weighted(const Matrix& X, const Vector& weights,
                                   const Vector& u, const CauchyParams& params) {
  Vector un = fixed_point_direction(X, weights, u, params);
  double norm = un.norm();
  if (norm <= 1e-14) {
    throw CpcaError(ErrorCode::kZeroUpdate,
                    "fixed-point update vanished (degenerate stationary configuration)");
  }
  return un / norm;
}

CauchyPcaResult fit_cauchy_pca(const DataMatrix& X, const CauchyPcaConfig& cfg) {
  const Eigen::Index p = X.p();
  if (cfg.k < 1 || cfg.k > p) throw std::invalid_argument("component count must be in [1, p]");
  if (!(cfg.outer_tol > 0.0)) throw std::invalid_argument("outer_tol must be positive");
  if (cfg.max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be positive");
  if (X.n() < 3) {
    throw CpcaError(ErrorCode::kDegenerateSample, "need at least 3 rows to fit");
  }
  if (cfg.init_mode == InitMode::kProvided &&
      static_cast<int>(cfg.initial_directions.size()) < cfg.k) {
    throw std::invalid_argument("provided init needs one direction per component");
  }

  const double data_scale = X.values.cwiseAbs().maxCoeff();
  CauchyPcaResult result;
  Matrix deflated = X.values;

  for (int j = 0; j < cfg.k; ++j) {
    const std::string tag = "component " + std::to_string(j + 1);
    if (deflated.cwiseAbs().maxCoeff() <= 1e-12 * std::max(data_scale, 1e-300)) {
      throw CpcaError(ErrorCode::kDegenerateSample,
                      tag + ": no spread left after deflation (rank exhausted)");
    }

    const DataMatrix residual{deflated};

    // Starting direction: classical PC of the residual data, with a seeded
    // random fallback when the power iteration cannot separate eigenvalues.
    Vector u;
    switch (cfg.init_mode) {
      case InitMode::kProvided:
        u = cfg.initial_directions[j];
        break;
      case InitMode::kRandom:
        u = RngStream::derive(cfg.seed, {0x696e6974ULL, static_cast<std::uint64_t>(j)})
                .normal_vector(p);
        break;
      case InitMode::kClassicalPc:
        try {
          u = classical_first_pc(residual).direction.coords();
        } catch (const CpcaError&) {
          u = RngStream::derive(cfg.seed, {0x696e6974ULL, static_cast<std::uint64_t>(j)})
                  .normal_vector(p);
        }
        break;
    }
    if (!project_out(u, result.directions)) {
      throw CpcaError(ErrorCode::kZeroUpdate, tag + ": starting direction lies in the "
                                              "span of earlier components");
    }

    bool converged = false;
    int iterations = 0;
    CauchyParams params;
    try {
      params = fit_cauchy(deflated * u).params;
    } catch (const CpcaError& e) {
      if (e.code() == ErrorCode::kDegenerateSample || e.code() == ErrorCode::kZeroUpdate ||
          e.code() == ErrorCode::kFailedConvergence) {
        throw CpcaError(e.code(), tag + ": " + e.raw_message());
      }
      throw;
    }
    double psi = cauchy_loglik(params, deflated * u);
    for (int it = 1; it <= cfg.max_outer_iters; ++it) {
      iterations = it;
      try {
        // With (mu, sigma) frozen, run the direction map to its own fixed
        // point before the next refit. A single map application per refit is
        // not a contraction near the optimum and can lock into a period-2
        // orbit under heavy contamination; driving the direction subproblem
        // to stationarity at each round restores convergence.
        Vector prop = u;
        for (int inner = 0; inner < cfg.max_outer_iters; ++inner) {
          Vector step = fixed_point_update(residual, prop, params).coords();
          if (!project_out(step, result.directions)) {
            throw CpcaError(ErrorCode::kZeroUpdate,
                            tag + ": update collapsed onto earlier components");
          }
          if (step.dot(prop) < 0.0) step = -step;  // sign continuity
          double inner_change = angle_degrees(step, prop);
          prop = step;
          if (inner_change <= 0.1 * cfg.outer_tol) break;
        }
        if (prop.dot(u) < 0.0) prop = -prop;  // sign continuity across rounds

        // The full alternation step can overshoot the optimum and orbit it
        // instead of settling. Backtracking on the profile objective forces
        // monotone progress: accept the step only when refitting at the
        // candidate does not worsen the objective, otherwise halve the step
        // toward the proposal. Ties accept at full step, so converging runs
        // follow the plain alternation path unchanged.
        bool moved = false;
        double change = 0.0;
        for (double t = 1.0; t >= 0.015; t *= 0.5) {
          Vector cand = ((1.0 - t) * u + t * prop).normalized();
          CauchyParams cand_params = fit_cauchy(deflated * cand).params;
          double cand_psi = cauchy_loglik(cand_params, deflated * cand);
          if (cand_psi <= psi) {
            change = angle_degrees(cand, u);
            u = cand;
            params = cand_params;
            psi = cand_psi;
            moved = true;
            break;
          }
        }
        if (!moved || change <= cfg.outer_tol) {
          converged = true;
          break;
        }
      } catch (const CpcaError& e) {
        if (e.code() == ErrorCode::kDegenerateSample || e.code() == ErrorCode::kZeroUpdate ||
            e.code() == ErrorCode::kFailedConvergence) {
          throw CpcaError(e.code(), tag + ": " + e.raw_message());
        }
        throw;
      }
    }

    // Refit at the final direction so the stored (direction, params) pair is a
    // consistent stationary point for downstream influence evaluations.
    try {
      params = fit_cauchy(deflated * u).params;
    } catch (const CpcaError& e) {
      throw CpcaError(e.code(), tag + ": " + e.raw_message());
    }

    result.directions.push_back(UnitDirection::normalized(u));
    result.params.push_back(params);
    result.iterations.push_back(iterations);
    result.converged.push_back(converged);
    deflated = deflate(deflated, result.directions.back().coords());
  }
  return result;
}

double cauchy_profile_loglik(const DataMatrix& X, const Vector& u) {
  Vector c = X.values * u;
  CauchyFit fit = fit_cauchy(c);
  return cauchy_loglik(fit.params, c);
}

EquivalenceCheck gaussian_pca_equivalence_check(const DataMatrix& X) {
  const Eigen::Index p = X.p();
  if (p > 3) {
    throw CpcaError(ErrorCode::kUnsupportedDimension,
                    "direction grid is only feasible for p <= 3");
  }
  const double n = static_cast<double>(X.n());

  auto profile_loglik = [&](const Vector& u, double* variance_out) {
    Vector c = X.values * u;
    double mean = c.mean();
    double var = (c.array() - mean).square().sum() / n;
    if (variance_out != nullptr) *variance_out = var;
    // a spread-free direction concentrates all mass at a point: the profiled
    // likelihood diverges upward, so it can never be the argmin
    if (var <= 0.0) return std::numeric_limits<double>::infinity();
    // Gaussian log-likelihood at the per-direction optimum (mean, variance).
    return -0.5 * n * std::log(var) - (c.array() - mean).square().sum() / (2.0 * var);
  };

  EquivalenceCheck out;
  if (p == 1) {
    double var = 0.0;
    profile_loglik(Vector::Ones(1), &var);
    if (var <= 0.0) throw CpcaError(ErrorCode::kZeroVariance, "constant 1-D sample");
    return out;  // the only unit direction: angle 0, ratio 1
  }

  auto [cov, xbar] = sample_covariance(X.values);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  double lam1 = es.eigenvalues()[p - 1];
  double lam2 = es.eigenvalues()[p - 2];
  out.degenerate = (lam1 - lam2) <= 1e-3 * std::max(lam1, 1e-300);
  Vector u_cov = es.eigenvectors().col(p - 1);

  // The profile log-likelihood -n/2 log var(c) - n/2 is decreasing in the
  // projected variance, so its grid argmin is the likelihood counterpart of
  // the covariance argmax.
  double best_ll = std::numeric_limits<double>::infinity();
  double best_var = 0.0;
  Vector best_u;
  auto consider = [&](const Vector& u) {
    double var = 0.0;
    double ll = profile_loglik(u, &var);
    if (ll < best_ll) {
      best_ll = ll;
      best_var = var;
      best_u = u;
    }
  };

  const double deg = M_PI / 180.0;
  if (p == 2) {
    for (double t = 0.0; t < 180.0; t += 0.1) {
      consider(Vector{{std::cos(t * deg), std::sin(t * deg)}});
    }
  } else {
    for (double az = 0.0; az < 180.0; az += 1.0) {
      for (double el = -90.0; el <= 90.0; el += 1.0) {
        consider(Vector{{std::cos(el * deg) * std::cos(az * deg),
                         std::cos(el * deg) * std::sin(az * deg), std::sin(el * deg)}});
      }
    }
  }

  out.angle = angle_degrees(best_u, u_cov);
  out.variance_ratio = lam1 > 0.0 ? best_var / lam1 : 1.0;
  return out;
}

}  // namespace cpca
