#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpca/robust_prep.hpp"
#include "cpca/types.hpp"

namespace cpca {

struct SimScenario {
  int n = 100;
  int p = 100;
  std::optional<double> kappa;  // outlier log-norm; nullopt = no outliers
  double phi_degrees = 0.0;     // angle between outlier direction and clean PC
  double contamination = 0.02;  // fraction of n, ceil'ed to a count
  double shift = 50.0;          // added to every coordinate of the clean draw
  double eigen_rate = 0.4;      // eigenvalues ~ Exp(eigen_rate)
  int reps = 30;
  std::uint64_t seed = 0;
  CenteringSpec centering;
  bool iid_outlier_dirs = false;  // default: all outliers in a rep share one z

  void validate() const;  // throws std::invalid_argument with the field name
};

struct TrialResult {
  double angle_cauchy = 0;
  double angle_pp = 0;
  double angle_classical = 0;
  double runtime_cauchy = 0, runtime_pp = 0, runtime_classical = 0;  // seconds
};

// Population: B = orthonormal_basis(seed-derived draw), eigenvalues ~
// Exp(eigen_rate) sorted descending with B's columns permuted to match, so the
// first column is the true leading eigenvector. Sigma = B Lambda B^T, mu = 0.
struct Population {
  CovarianceModel model;
  UnitDirection clean_pc;
  Vector eigenvalues;  // descending
  Matrix basis;        // columns permuted consistently with eigenvalues
};

Population generate_population(Eigen::Index p, double eigen_rate, std::uint64_t seed);

// xbar + e^kappa z with unit z = cos(phi) clean_pc + sin(phi) w, w a seeded
// random unit vector orthogonal to clean_pc.
Vector make_outlier(const Vector& xbar, double kappa, double phi_degrees,
                    const UnitDirection& clean_pc, std::uint64_t seed);

enum class PpIndex { kMad };  // 1.4826 * median |c - median(c)|

// Projection-pursuit comparator: maximizes the robust scale of projections
// over {normalized median-centered rows} + {classical PC} + 512 seeded random
// directions, then polishes the leading candidates with seeded adaptive-step
// local search.
UnitDirection pp_first_pc(const DataMatrix& X, PpIndex index = PpIndex::kMad,
                          std::uint64_t seed = 0);

struct ScenarioRow {
  double mean_angle_cauchy = 0;
  double mean_angle_pp = 0;
  double mean_angle_classical = 0;
  double mean_runtime_cauchy = 0, mean_runtime_pp = 0, mean_runtime_classical = 0;
  int reps_used = 0;
  int reps_failed = 0;
};

// Monte Carlo aggregation over scenario replicates. Per rep: draw population
// and data, add the shift, append outliers, robust-prep; the benchmark is the
// classical first PC of the clean rows passed through the same preparation,
// and all three estimators are scored by their angle to it. Reps run on a
// worker pool; per-rep streams are derived from (seed, rep, role), and
// aggregation is pairwise over the rep-indexed results, so the output is
// independent of thread count.
// Throws FAILED_CONVERGENCE if more than 10% of reps fail.
ScenarioRow run_scenario(const SimScenario& s, int threads = 1);

}  // namespace cpca
