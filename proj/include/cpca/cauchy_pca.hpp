#pragma once

#include <cstdint>
#include <vector>

#include "cpca/cauchy_mle.hpp"
#include "cpca/types.hpp"

namespace cpca {

enum class InitMode { kClassicalPc, kRandom, kProvided };

struct CauchyPcaConfig {
  int k = 1;
  double outer_tol = 1e-6;   // angle change between successive directions, degrees
  int max_outer_iters = 500;
  InitMode init_mode = InitMode::kClassicalPc;
  std::uint64_t seed = 0;    // used by kRandom (and the fallback when the
                             // classical start fails to converge)
  std::vector<Vector> initial_directions;  // used by kProvided, one per component
};

struct CauchyPcaResult {
  std::vector<UnitDirection> directions;
  std::vector<CauchyParams> params;
  std::vector<int> iterations;
  std::vector<bool> converged;  // false = iteration cap hit (flag, not an error)
};

// One step of the direction recursion: u_un = sum_i (x_i.u - mu) x_i /
// (sigma^2 + (x_i.u - mu)^2), returned normalized in canonical sign.
// Throws ZERO_UPDATE when ||u_un|| <= 1e-14.
UnitDirection fixed_point_update(const DataMatrix& X, const Vector& u,
                                 const CauchyParams& params);

// Weighted form for the finite-epsilon influence oracle.
Vector fixed_point_update_weighted(const Matrix& X, const Vector& weights,
                                   const Vector& u, const CauchyParams& params);

// Sequential Cauchy principal directions: for each component, alternate the
// location/scale MLE on the projections with the direction map run to its own
// fixed point under the frozen (mu, sigma), until the per-round angle change
// drops below outer_tol, then deflate. Directions come back canonically
// signed and pairwise orthogonal. DEGENERATE_SAMPLE and ZERO_UPDATE propagate
// with the failing component index in the message.
CauchyPcaResult fit_cauchy_pca(const DataMatrix& X, const CauchyPcaConfig& cfg);

struct EquivalenceCheck {
  double angle = 0.0;           // degrees, likelihood argmin vs covariance argmax
  double variance_ratio = 1.0;  // projected variance at grid argmin / leading eigenvalue
  bool degenerate = false;      // (near-)tied top eigenvalues: angle meaningless
};

// Certifies the likelihood interpretation of classical PCA: the maximized
// Gaussian log-likelihood -n/2 log var(c) - n/2 decreases in the projected
// variance, so its argmin over directions is the leading eigenvector.
// Evaluates it on a dense direction grid (p <= 3; UNSUPPORTED_DIMENSION
// above) and compares the grid argmin against the covariance eigenvector.
EquivalenceCheck gaussian_pca_equivalence_check(const DataMatrix& X);

// Profile log-likelihood of the direction u: fit the projections, return the
// maximized Cauchy log-likelihood. Exposed for the minimality sanity checks.
double cauchy_profile_loglik(const DataMatrix& X, const Vector& u);

}  // namespace cpca
