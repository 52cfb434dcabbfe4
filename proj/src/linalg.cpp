#include "cpca/linalg.hpp"

#include <cmath>

#include "cpca/rng.hpp"

namespace cpca {

Matrix orthonormal_basis(std::uint64_t seed, Eigen::Index p) {
  if (p < 1) throw std::invalid_argument("orthonormal_basis needs p >= 1");
  RngStream stream(seed);
  Matrix draw = stream.normal_matrix(p, p);
  Eigen::HouseholderQR<Matrix> qr(draw);
  Matrix q = qr.householderQ() * Matrix::Identity(p, p);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Householder leaves the column signs arbitrary; requiring diag(R) > 0
  // pins the unique factorization whose Q matches Gram-Schmidt.
  for (Eigen::Index j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

std::pair<Matrix, Vector> sample_covariance(const Matrix& X) {
  const double n = static_cast<double>(X.rows());
  Vector xbar = X.colwise().mean();
  Matrix centered = X.rowwise() - xbar.transpose();
  Matrix cov = centered.transpose() * centered / n;
  return {std::move(cov), std::move(xbar)};
}

namespace {

// Power iteration on a PSD matrix. Restarts with fresh directions cover the
// (measure-zero) case of a start vector orthogonal to the leading eigenvector;
// no deflation is ever applied. Returns false when the iteration budget is
// exhausted before the relative eigenvalue change reaches `tol`.
//
// Reaching `tol` on the eigenvalue is the success contract, but it is a weak
// certificate for the direction: the Rayleigh quotient error is quadratic in
// the angle error, so the iteration keeps going until the iterate itself
// stops moving (or the budget runs out), which pins the direction down to
// near machine precision instead of ~sqrt(tol).
bool power_iteration(const Matrix& cov, Vector& v, double& lambda, double tol,
                     int max_iters) {
  const Eigen::Index p = cov.rows();
  std::vector<Vector> starts;
  if (v.size() == p && v.norm() > 0.0) {
    starts.push_back(v / v.norm());
  } else {
    Eigen::Index lead;
    cov.diagonal().maxCoeff(&lead);
    starts.push_back(Vector::Unit(p, lead));
  }
  {
    RngStream stream(RngStream::mix(0x706f776572ULL, static_cast<std::uint64_t>(p)));
    starts.push_back(stream.normal_vector(p).normalized());
  }

  const int per_start = max_iters / static_cast<int>(starts.size());
  for (const Vector& start : starts) {
    Vector u = start;
    double prev = u.dot(cov * u);
    bool tol_reached = false;
    for (int it = 0; it < per_start; ++it) {
      Vector w = cov * u;
      double norm = w.norm();
      if (norm == 0.0) break;  // start lies in the null space; try the next one
      Vector next = w / norm;
      if (next.dot(u) < 0.0) next = -next;
      double cur = next.dot(cov * next);
      if (std::abs(cur - prev) <= tol * std::max(std::abs(cur), 1e-300)) {
        tol_reached = true;
      }
      double drift = (next - u).norm();
      u = std::move(next);
      prev = cur;
      if (drift <= 1e-13) break;
    }
    if (tol_reached) {
      v = u;
      lambda = prev;
      return true;
    }
  }
  return false;
}

}  // namespace

LeadingEigen classical_first_pc(const DataMatrix& X) {
  auto [cov, xbar] = sample_covariance(X.values);
  double scale = 1.0 + xbar.squaredNorm();
  if (cov.trace() <= 1e-18 * scale) {
    throw CpcaError(ErrorCode::kZeroVariance, "sample covariance is numerically zero");
  }
  Vector v;
  double lambda = 0.0;
  if (!power_iteration(cov, v, lambda, 1e-10, 10000)) {
    throw CpcaError(ErrorCode::kFailedConvergence,
                    "power iteration stalled; leading eigenvalues may be (near-)tied");
  }
  return {UnitDirection::normalized(v), lambda};
}

Vector weighted_classical_first_pc(const Matrix& X, const Vector& weights,
                                   const Vector& start, double* eigenvalue_out) {
  const double wsum = weights.sum();
  if (!(wsum > 0.0)) throw std::invalid_argument("weights must sum to a positive value");
  Vector mu = (X.transpose() * weights) / wsum;
  Matrix centered = X.rowwise() - mu.transpose();
  Matrix cov = centered.transpose() * weights.asDiagonal() * centered / wsum;
  Vector v = start;
  double lambda = 0.0;
  if (!power_iteration(cov, v, lambda, 1e-13, 200000)) {
    throw CpcaError(ErrorCode::kFailedConvergence,
                    "weighted power iteration stalled; leading eigenvalues may be (near-)tied");
  }
  if (v.dot(start) < 0.0) v = -v;
  if (eigenvalue_out != nullptr) *eigenvalue_out = lambda;
  return v;
}

Matrix deflate(const Matrix& X, const Vector& u) {
  return X - (X * u) * u.transpose();
}

double angle_degrees(const Vector& a, const Vector& b) {
  double dot = std::min(1.0, std::abs(a.dot(b)));
  return std::acos(dot) * 180.0 / M_PI;
}

Matrix pseudo_inverse_shifted(const Matrix& sigma, double lambda) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()));
  const Vector& e = es.eigenvalues();
  double emax = e.cwiseAbs().maxCoeff();
  Vector inv(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    double shifted = e[i] - lambda;
    inv[i] = std::abs(shifted) > 1e-10 * emax ? 1.0 / shifted : 0.0;
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace cpca
