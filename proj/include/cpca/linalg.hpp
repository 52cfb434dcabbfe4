#pragma once

#include <cstdint>
#include <utility>

#include "cpca/types.hpp"

namespace cpca {

// Q from the QR factorization of a p x p matrix of seeded standard normals,
// sign-fixed so that diag(R) > 0 (which makes Q equal to the Gram-Schmidt
// orthonormalization of the draw's columns). Deterministic for a fixed seed.
Matrix orthonormal_basis(std::uint64_t seed, Eigen::Index p);

struct LeadingEigen {
  UnitDirection direction;
  double eigenvalue;
};

// Leading eigenvector/eigenvalue of the sample covariance
// (1/n) (X - 1 xbar^T)^T (X - 1 xbar^T), by power iteration.
// Throws FAILED_CONVERGENCE when the relative eigenvalue change has not
// reached 1e-10 within 10000 iterations (the symptom of (near-)tied leading
// eigenvalues) and ZERO_VARIANCE when the covariance is (numerically) zero.
LeadingEigen classical_first_pc(const DataMatrix& X);

// Weighted variant used by the finite-epsilon influence oracle: covariance
// moments use normalized weights, and the iteration warm-starts at `start`
// (result sign-aligned with it, not canonicalized).
Vector weighted_classical_first_pc(const Matrix& X, const Vector& weights,
                                   const Vector& start, double* eigenvalue_out = nullptr);

// X (I - u u^T): removes the component along u from every row.
Matrix deflate(const Matrix& X, const Vector& u);

// arccos(min(1, |a.b|)) in degrees; sign-invariant, range [0, 90].
double angle_degrees(const Vector& a, const Vector& b);

// (Sigma - lambda I)^+ via full symmetric eigendecomposition: eigenvalues e
// with |e - lambda| > 1e-10 max|e| are inverted, the rest map to zero.
Matrix pseudo_inverse_shifted(const Matrix& sigma, double lambda);

// Sample covariance (1/n normalization) and mean of the rows of X.
std::pair<Matrix, Vector> sample_covariance(const Matrix& X);

}  // namespace cpca
