#pragma once

#include "cpca/types.hpp"

namespace cpca {

enum class CenterMode { kColumnMedian, kSpatialMedian, kNone };
enum class ScaleMode { kMadAboutMedian, kMadAboutMean, kNone };

struct CenteringSpec {
  CenterMode mode = CenterMode::kColumnMedian;
  ScaleMode scale = ScaleMode::kMadAboutMedian;
};

// Lower median: sorted[(n-1)/2]. Deterministic for even n and keeps the
// "centered column has median exactly zero" property exact.
double lower_median(const Vector& v);

struct CenterResult {
  Matrix centered;
  Vector center;
};

// Subtracts the per-column (lower) median.
CenterResult column_median_center(const DataMatrix& X);

// Minimizer of sum_i ||x_i - m|| by Weiszfeld iteration. When an iterate
// lands within 1e-12 of a data point the subgradient condition decides
// whether that point is the minimizer. Gradient tolerance 1e-8, cap 10000
// iterations, n = 2 returns the midpoint by convention.
Vector spatial_median(const DataMatrix& X);

struct ScaleResult {
  Matrix scaled;
  Vector scales;
};

// Divides each column by its mean absolute deviation: mean_i |x_ij - center_j|
// where center_j is the column (lower) median — or the column mean for the
// kMadAboutMean variant. Throws ZERO_SCALE naming the first constant column.
ScaleResult mad_scale(const DataMatrix& X, ScaleMode mode = ScaleMode::kMadAboutMedian);

struct PrepResult {
  Matrix prepped;
  Vector center;  // zeros when centering is off
  Vector scales;  // ones when scaling is off
};

// Center then scale; the applied transform is recorded alongside the data.
PrepResult prepare(const DataMatrix& X, const CenteringSpec& spec);

}  // namespace cpca
