#pragma once

// 4D midpoint oracle for the E functional, straight from the pointwise
// integrand over the product of ordered-time triangles. Interior cells use
// full weight at their centers; diagonal cells use half weight at the
// centroid of their admissible half. Deliberately independent of the
// gap-variable reduction.

#include <vector>

#include "fbmlab/kernels.hpp"
#include "fbmlab/params.hpp"

namespace fbmlab::testing {

inline double brute_force_e(double eps, double gamma,
                            const ModelParams& params, int m) {
  const double T = params.horizon;
  const double h = T / m;
  struct PairPt {
    double lo, hi, w;
  };
  std::vector<PairPt> pts;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      if (i == j)
        pts.push_back({(i + 1.0 / 3.0) * h, (i + 2.0 / 3.0) * h, 0.5});
      else
        pts.push_back({(i + 0.5) * h, (j + 0.5) * h, 1.0});
    }
  double total = 0.0;
  for (const auto& p1 : pts)
    for (const auto& p2 : pts) {
      const TimeQuad tau{p1.lo, p1.hi, p2.lo, p2.hi};
      total += p1.w * p2.w * e_integrand(tau, eps, gamma, params);
    }
  return total * h * h * h * h;
}

} // namespace fbmlab::testing
