#include "cpca/robust_prep.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cpca {

double lower_median(const Vector& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  auto mid = sorted.begin() + (sorted.size() - 1) / 2;
  std::nth_element(sorted.begin(), mid, sorted.end());
  return *mid;
}

CenterResult column_median_center(const DataMatrix& X) {
  CenterResult out;
  out.center.resize(X.p());
  out.centered = X.values;
  for (Eigen::Index j = 0; j < X.p(); ++j) {
    out.center[j] = lower_median(X.values.col(j));
    out.centered.col(j).array() -= out.center[j];
  }
  return out;
}

Vector spatial_median(const DataMatrix& X) {
  const Eigen::Index n = X.n();
  const Matrix& rows = X.values;

  bool all_identical = true;
  for (Eigen::Index i = 1; i < n && all_identical; ++i) {
    all_identical = (rows.row(i) - rows.row(0)).cwiseAbs().maxCoeff() == 0.0;
  }
  if (all_identical) throw std::invalid_argument("spatial median needs non-identical rows");

  if (n == 2) return 0.5 * (rows.row(0) + rows.row(1));  // any segment point ties; midpoint by convention

  Vector m = rows.colwise().mean();
  for (int iter = 0; iter < 10000; ++iter) {
    // Partition rows into those at the iterate (within 1e-12) and the rest.
    Vector weighted = Vector::Zero(X.p());
    Vector residual = Vector::Zero(X.p());  // sum of unit vectors away from m
    double inv_sum = 0.0;
    int multiplicity = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector diff = rows.row(i).transpose() - m;
      double dist = diff.norm();
      if (dist <= 1e-12) {
        ++multiplicity;
        continue;
      }
      residual += diff / dist;
      weighted += rows.row(i).transpose() / dist;
      inv_sum += 1.0 / dist;
    }

    double rnorm = residual.norm();
    if (multiplicity > 0) {
      // At a data point the objective is non-smooth; the point is optimal
      // exactly when the pull of the remaining rows is no stronger than the
      // multiplicity. Otherwise step away along the combined update.
      if (rnorm <= static_cast<double>(multiplicity)) return m;
      Vector weiszfeld = weighted / inv_sum;
      double shrink = static_cast<double>(multiplicity) / rnorm;
      m = (1.0 - shrink) * weiszfeld + shrink * m;
      continue;
    }

    if (rnorm <= 1e-8) return m;  // gradient is -residual
    m = weighted / inv_sum;
  }
  throw CpcaError(ErrorCode::kFailedConvergence,
                  "spatial median iteration exhausted its budget");
}

ScaleResult mad_scale(const DataMatrix& X, ScaleMode mode) {
  if (mode == ScaleMode::kNone) {
    return {X.values, Vector::Ones(X.p())};
  }
  ScaleResult out;
  out.scales.resize(X.p());
  out.scaled = X.values;
  const double n = static_cast<double>(X.n());
  for (Eigen::Index j = 0; j < X.p(); ++j) {
    double center = mode == ScaleMode::kMadAboutMean ? X.values.col(j).mean()
                                                     : lower_median(X.values.col(j));
    double mad = (X.values.col(j).array() - center).abs().sum() / n;
    if (!(mad > 0.0)) {
      throw CpcaError(ErrorCode::kZeroScale,
                      "column " + std::to_string(j + 1) + " has zero spread");
    }
    out.scales[j] = mad;
    out.scaled.col(j) /= mad;
  }
  return out;
}

PrepResult prepare(const DataMatrix& X, const CenteringSpec& spec) {
  PrepResult out;
  out.center = Vector::Zero(X.p());
  out.scales = Vector::Ones(X.p());

  Matrix work = X.values;
  switch (spec.mode) {
    case CenterMode::kColumnMedian: {
      CenterResult c = column_median_center(X);
      work = std::move(c.centered);
      out.center = std::move(c.center);
      break;
    }
    case CenterMode::kSpatialMedian: {
      out.center = spatial_median(X);
      work = X.values.rowwise() - out.center.transpose();
      break;
    }
    case CenterMode::kNone:
      break;
  }
  if (spec.scale != ScaleMode::kNone) {
    ScaleResult s = mad_scale(DataMatrix{std::move(work)}, spec.scale);
    work = std::move(s.scaled);
    out.scales = std::move(s.scales);
  }
  out.prepped = std::move(work);
  return out;
}

}  // namespace cpca
