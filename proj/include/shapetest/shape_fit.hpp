#pragma once

#include <cstddef>
#include <vector>

namespace shapetest {

// Exact total-variation projection of a piecewise-constant sequence onto the
// non-increasing or unimodal distributions. Cell j has per-point value v[j]
// and positive weight w[j] (its size); sum_j w[j] v[j] must be 1.
//
// For a multiplier lambda the normalized problem decouples into weighted
// quantile isotonic regressions at level tau = (1 - lambda) / 2, solved by
// pool-adjacent-violators. Bisection on tau brackets the normalization; the
// bracket endpoints give matching lower (dual) and upper (primal) bounds.
struct ShapeFitResult {
  double distance = 0.0;     // half the weighted L1 gap
  std::size_t split = 0;     // cells [0, split) rise, [split, L) fall
  std::vector<double> fit;   // per-cell values of an optimal f (when requested)
};

ShapeFitResult project_non_increasing(const std::vector<double>& v, const std::vector<double>& w,
                                      bool want_fit = false);
ShapeFitResult project_unimodal(const std::vector<double>& v, const std::vector<double>& w,
                                bool want_fit = false);

}  // namespace shapetest
