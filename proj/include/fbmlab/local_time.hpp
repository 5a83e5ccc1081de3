#pragma once

#include <span>
#include <vector>

#include "fbmlab/fbm.hpp"

namespace fbmlab {

/// Gaussian density with variance eps per coordinate, evaluated at x.
double heat_kernel(std::span<const double> x, double eps);

struct LocalTimeEstimate {
  double epsilon = 0.0;
  double value = 0.0;          ///< nonnegative estimate
  double centered = 0.0;       ///< value - mean_reference
  double mean_reference = 0.0;
  int discretization_n = 0;
};

struct EdwardsWeight {
  double g = 0.0;
  double weight = 1.0;
  bool centered_flag = false;
  bool saturated = false; ///< exponent hit the +-700 clamp
};

/// Double Riemann sum h^2 sum_{0<=j<i<=n-1} p_eps(B(t_i)-B(t_j)) over the
/// strict lower triangle, left points, diagonal excluded. Accumulation is
/// Kahan-compensated in fixed (i,j) order.
LocalTimeEstimate local_time(const Path& path, double eps);

/// Same pair sweep for several eps values at once (the O(n^2) distance
/// work is shared).
std::vector<LocalTimeEstimate> local_time_many(const Path& path,
                                               std::span<const double> eps);

LocalTimeEstimate center(LocalTimeEstimate est, double mean);

/// exp(-g * value) or exp(-g * centered); the exponent is clamped to
/// [-700, 700] with the clamp reported.
EdwardsWeight edwards_weight(const LocalTimeEstimate& est, double g,
                             bool use_centered);

} // namespace fbmlab
