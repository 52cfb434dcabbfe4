#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.1.0";

// Failure classes surfaced by the library. The CLI maps these to exit codes;
// tests match on them. Names are stable API.
enum class ErrorCode {
  kFailedConvergence,
  kZeroVariance,
  kDegenerateSample,
  kZeroUpdate,
  kZeroScale,
  kMultiplicity,
  kSingularA,
  kSingularFisher,
  kUnsupportedDimension,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFailedConvergence: return "FAILED_CONVERGENCE";
    case ErrorCode::kZeroVariance: return "ZERO_VARIANCE";
    case ErrorCode::kDegenerateSample: return "DEGENERATE_SAMPLE";
    case ErrorCode::kZeroUpdate: return "ZERO_UPDATE";
    case ErrorCode::kZeroScale: return "ZERO_SCALE";
    case ErrorCode::kMultiplicity: return "MULTIPLICITY";
    case ErrorCode::kSingularA: return "SINGULAR_A";
    case ErrorCode::kSingularFisher: return "SINGULAR_FISHER";
    case ErrorCode::kUnsupportedDimension: return "UNSUPPORTED_DIMENSION";
  }
  return "UNKNOWN";
}

class CpcaError : public std::runtime_error {
 public:
  CpcaError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        raw_(message) {}

  ErrorCode code() const { return code_; }
  const std::string& raw_message() const { return raw_; }

 private:
  ErrorCode code_;
  std::string raw_;
};

// Unit-norm direction with a deterministic sign: the entry of largest absolute
// value is nonnegative, ties broken by lowest index. Eigen-directions are only
// defined up to sign, so every direction that leaves the library goes through
// this normalization to make outputs reproducible and angle tests meaningful.
class UnitDirection {
 public:
  static UnitDirection normalized(const Vector& v) {
    double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::invalid_argument("cannot normalize a zero or non-finite vector");
    }
    Vector u = v / norm;
    canonicalize_sign(u);
    return UnitDirection(std::move(u));
  }

  const Vector& coords() const { return coords_; }
  Eigen::Index size() const { return coords_.size(); }

  static void canonicalize_sign(Vector& u) {
    Eigen::Index lead = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      double a = std::abs(u[i]);
      if (a > best) {  // strict: ties keep the lowest index
        best = a;
        lead = i;
      }
    }
    if (u[lead] < 0.0) u = -u;
  }

 private:
  explicit UnitDirection(Vector u) : coords_(std::move(u)) {}
  Vector coords_;
};

// Sample matrix, rows = observations. Validation is explicit so error messages
// can name the offending entry; most library entry points call it once.
struct DataMatrix {
  Matrix values;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }

  static DataMatrix validated(Matrix m) {
    if (m.rows() < 2) throw std::invalid_argument("data matrix needs n >= 2 rows");
    if (m.cols() < 1) throw std::invalid_argument("data matrix needs p >= 1 columns");
    if (!m.allFinite()) throw std::invalid_argument("data matrix has non-finite entries");
    return DataMatrix{std::move(m)};
  }
};

// Location/scale parameters of the projected-data model.
struct CauchyParams {
  double mu = 0.0;
  double sigma = 1.0;

  bool valid() const {
    return std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0;
  }
};

// Population model (Sigma, mu) used by the classical influence function and
// the simulation harness.
struct CovarianceModel {
  Matrix sigma;
  Vector mu;

  static CovarianceModel validated(Matrix sigma, Vector mu) {
    if (sigma.rows() != sigma.cols()) {
      throw std::invalid_argument("covariance must be square");
    }
    if (mu.size() != sigma.rows()) {
      throw std::invalid_argument("mean length must match covariance dimension");
    }
    double scale = sigma.cwiseAbs().maxCoeff();
    double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (scale > 0.0 && asym > 1e-10 * scale) {
      throw std::invalid_argument("covariance not symmetric to 1e-10 relative");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()),
                                             Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-10 * std::max(hi, 0.0)) {
      throw std::invalid_argument("covariance has a significantly negative eigenvalue");
    }
    return CovarianceModel{std::move(sigma), std::move(mu)};
  }
};

}  // namespace cpca
