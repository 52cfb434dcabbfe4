#include "cpca/influence.hpp"

#include <cmath>

#include "cpca/cauchy_pca.hpp"
#include "cpca/linalg.hpp"

namespace cpca {

ClassicalIfResult classical_if(const Vector& z, const CovarianceModel& model) {
  const Eigen::Index p = model.sigma.rows();
  if (z.size() != p) throw std::invalid_argument("z dimension mismatch");

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (model.sigma + model.sigma.transpose()));
  double lam1 = es.eigenvalues()[p - 1];
  double lam2 = p > 1 ? es.eigenvalues()[p - 2] : -std::numeric_limits<double>::infinity();
  double scale = std::max(std::abs(lam1), 1e-300);
  if (p > 1 && (lam1 - lam2) <= 1e-8 * scale) {
    throw CpcaError(ErrorCode::kMultiplicity, "leading eigenvalue is not simple");
  }
  Vector u = es.eigenvectors().col(p - 1);
  UnitDirection::canonicalize_sign(u);

  Vector d = z - model.mu;
  double proj = d.dot(u);
  ClassicalIfResult out;
  out.if_vector = -proj * (pseudo_inverse_shifted(model.sigma, lam1) * d);
  out.if_eigenvalue = proj * proj - lam1;
  return out;
}

GBarDerivatives gbar_derivatives(double c, const CauchyParams& params) {
  const double sigma = params.sigma;
  const double s2 = sigma * sigma;
  const double d = c - params.mu;
  const double den = s2 + d * d;
  const double den2 = den * den;

  GBarDerivatives g;
  g.g_c = -2.0 * d / den;
  g.g_mu = 2.0 * d / den;
  g.g_sigma = 1.0 / sigma - 2.0 * sigma / den;
  g.g_cc = 2.0 * (d * d - s2) / den2;
  g.g_c_theta << -g.g_cc,            // d2g/dc dmu
      4.0 * d * sigma / den2;        // d2g/dc dsigma
  g.g_theta_theta << g.g_cc, -4.0 * d * sigma / den2, -4.0 * d * sigma / den2,
      -1.0 / s2 - g.g_cc;
  return g;
}

CauchyIfResult cauchy_if(const Vector& z, const DataMatrix& X, const Vector& u_hat,
                         const CauchyParams& params, CauchyIfVariant variant) {
  const Eigen::Index p = X.p();
  const Eigen::Index n = X.n();
  if (z.size() != p || u_hat.size() != p) throw std::invalid_argument("dimension mismatch");
  if (!params.valid()) throw std::invalid_argument("invalid parameters");

  // Sample-average building blocks at the fitted direction. F is the
  // empirical distribution of X's rows, so every integral is a mean.
  Vector c = X.values * u_hat;
  double s_proj = 0.0;  // mean of g_c(x) (u.x)
  double s_main = 0.0;  // mean of g_c_mu(x) (x.u)
  Matrix m_cc = Matrix::Zero(p, p);
  Matrix c_mat = Matrix::Zero(p, 2);
  Eigen::Matrix2d fisher = Eigen::Matrix2d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    GBarDerivatives g = gbar_derivatives(c[i], params);
    const auto& x = X.values.row(i).transpose();
    s_proj += g.g_c * c[i];
    s_main += g.g_c_theta[0] * c[i];
    m_cc.noalias() += g.g_cc * x * x.transpose();
    c_mat.noalias() += x * g.g_c_theta.transpose();
    fisher += g.g_theta_theta;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  s_proj *= inv_n;
  s_main *= inv_n;
  m_cc *= inv_n;
  c_mat *= inv_n;
  fisher *= inv_n;

  CauchyIfResult out;
  out.fisher = fisher;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> fes(fisher);
  double fmax = fes.eigenvalues().cwiseAbs().maxCoeff();
  double fmin = fes.eigenvalues().cwiseAbs().minCoeff();
  if (!(fmin > 0.0) || fmax / fmin > 1e12) {
    out.singular_fisher = true;
    return out;
  }

  Matrix proj = Matrix::Identity(p, p) - u_hat * u_hat.transpose();
  Matrix k_mat = c_mat * fisher.inverse();  // p x 2
  Matrix sandwich = proj * k_mat * c_mat.transpose() * proj;
  Matrix pmp = proj * m_cc * proj;

  GBarDerivatives gz = gbar_derivatives(z.dot(u_hat), params);
  Eigen::Vector2d gz_theta(gz.g_mu, gz.g_sigma);

  switch (variant) {
    case CauchyIfVariant::kProjected:
      out.a_matrix = s_proj * Matrix::Identity(p, p) - pmp + sandwich;
      out.b_vector = proj * (gz.g_c * z - k_mat * gz_theta);
      break;
    case CauchyIfVariant::kUnprojected:
      out.a_matrix = s_main * Matrix::Identity(p, p) - pmp + sandwich;
      out.b_vector = gz.g_c * z + k_mat * gz_theta;
      break;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> aes(out.a_matrix);
  double amax = aes.eigenvalues().cwiseAbs().maxCoeff();
  double amin = aes.eigenvalues().cwiseAbs().minCoeff();
  if (!(amin > 0.0) || amax / amin > 1e12) {
    out.singular_a = true;
    return out;
  }
  out.if_vector = aes.eigenvectors() *
                  (aes.eigenvalues().cwiseInverse().asDiagonal() *
                   (aes.eigenvectors().transpose() * out.b_vector));
  return out;
}

CauchyDirectionFit tight_cauchy_direction_fit(const DataMatrix& X) {
  CauchyPcaConfig cfg;
  cfg.k = 1;
  cfg.outer_tol = 1e-9;
  cfg.max_outer_iters = 20000;
  CauchyPcaResult fit = fit_cauchy_pca(X, cfg);
  if (!fit.converged[0]) {
    throw CpcaError(ErrorCode::kFailedConvergence,
                    "direction fit did not reach the tight tolerance");
  }
  return {fit.directions[0].coords(), fit.params[0]};
}

namespace {

// Alternating weighted fit warm-started at a converged unweighted fit; the
// contamination weight is small, so this tracks the perturbed optimum.
Vector weighted_cauchy_direction(const Matrix& X, const Vector& weights,
                                 const Vector& u0, const CauchyParams& params0) {
  Vector u = u0;
  CauchyParams params = params0;
  for (int it = 0; it < 20000; ++it) {
    params = fit_cauchy_weighted_from(X * u, weights, params).params;
    Vector next = fixed_point_update_weighted(X, weights, u, params);
    if (next.dot(u) < 0.0) next = -next;
    double change = angle_degrees(next, u);
    u = next;
    if (change <= 1e-9) return u;
  }
  throw CpcaError(ErrorCode::kFailedConvergence,
                  "weighted direction fit did not reach the tight tolerance");
}

}  // namespace

Vector empirical_if(const Vector& z, const DataMatrix& X, IfEstimator estimator,
                    double eps) {
  if (!(eps > 0.0) || eps > 0.05) throw std::invalid_argument("eps must be in (0, 0.05]");
  const Eigen::Index n = X.n();
  const Eigen::Index p = X.p();
  if (z.size() != p) throw std::invalid_argument("z dimension mismatch");

  Matrix extended(n + 1, p);
  extended.topRows(n) = X.values;
  extended.row(n) = z.transpose();
  Vector weights(n + 1);
  weights.head(n).setConstant((1.0 - eps) / static_cast<double>(n));
  weights[n] = eps;

  Vector u0, u_eps;
  if (estimator == IfEstimator::kClassical) {
    u0 = classical_first_pc(X).direction.coords();
    u_eps = weighted_classical_first_pc(extended, weights, u0);
  } else {
    CauchyDirectionFit fit = tight_cauchy_direction_fit(X);
    u0 = fit.u_hat;
    u_eps = weighted_cauchy_direction(extended, weights, fit.u_hat, fit.params);
  }
  if (u_eps.dot(u0) < 0.0) u_eps = -u_eps;
  return (u_eps - u0) / eps;
}

Vector empirical_if_richardson(const Vector& z, const DataMatrix& X,
                               IfEstimator estimator, double eps) {
  Vector coarse = empirical_if(z, X, estimator, eps);
  Vector fine = empirical_if(z, X, estimator, 0.5 * eps);
  return 2.0 * fine - coarse;
}

}  // namespace cpca
