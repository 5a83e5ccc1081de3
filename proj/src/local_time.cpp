#include "fbmlab/local_time.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmlab {

double heat_kernel(std::span<const double> x, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("heat kernel needs eps > 0");
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double d = double(x.size());
  return std::pow(6.283185307179586476925286766559 * eps, -0.5 * d) *
         std::exp(-r2 / (2.0 * eps));
}

namespace {

struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

} // namespace

std::vector<LocalTimeEstimate> local_time_many(const Path& path,
                                               std::span<const double> eps) {
  const int n = path.grid.n;
  if (n < 2) throw std::domain_error("local time needs a path with n >= 2");
  for (double e : eps)
    if (!(e > 0.0)) throw std::domain_error("local time needs eps > 0");

  const int d = path.d;
  const double h = path.grid.step();
  const size_t ne = eps.size();

  std::vector<double> inv2e(ne), norm(ne);
  for (size_t k = 0; k < ne; ++k) {
    inv2e[k] = 1.0 / (2.0 * eps[k]);
    norm[k] = std::pow(6.283185307179586476925286766559 * eps[k], -0.5 * d);
  }

  std::vector<Kahan> acc(ne);
  const double* v = path.values.data();
  for (int i = 1; i < n; ++i) {
    const double* vi = v + size_t(i) * d;
    for (int j = 0; j < i; ++j) {
      const double* vj = v + size_t(j) * d;
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff = vi[c] - vj[c];
        r2 += diff * diff;
      }
      for (size_t k = 0; k < ne; ++k) acc[k].add(std::exp(-r2 * inv2e[k]));
    }
  }

  std::vector<LocalTimeEstimate> out(ne);
  for (size_t k = 0; k < ne; ++k) {
    out[k].epsilon = eps[k];
    out[k].value = h * h * norm[k] * acc[k].sum;
    out[k].centered = out[k].value;
    out[k].mean_reference = 0.0;
    out[k].discretization_n = n;
  }
  return out;
}

LocalTimeEstimate local_time(const Path& path, double eps) {
  return local_time_many(path, std::span<const double>(&eps, 1)).front();
}

LocalTimeEstimate center(LocalTimeEstimate est, double mean) {
  est.mean_reference = mean;
  est.centered = est.value - mean;
  return est;
}

EdwardsWeight edwards_weight(const LocalTimeEstimate& est, double g,
                             bool use_centered) {
  if (g < 0.0) throw std::domain_error("Edwards coupling g must be >= 0");
  EdwardsWeight w;
  w.g = g;
  w.centered_flag = use_centered;
  double expo = -g * (use_centered ? est.centered : est.value);
  if (expo > 700.0) {
    expo = 700.0;
    w.saturated = true;
  } else if (expo < -700.0) {
    expo = -700.0;
    w.saturated = true;
  }
  w.weight = std::exp(expo);
  return w;
}

} // namespace fbmlab
