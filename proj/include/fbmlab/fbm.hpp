#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbmlab/params.hpp"

namespace fbmlab {

/// Per-coordinate covariance of fractional Brownian motion,
/// R(s,t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double s, double t, double hurst);

/// Covariance of the increments B(t)-B(s) and B(t2)-B(s2), expanded from
/// R by bilinearity.
double increment_covariance(double s, double t, double s2, double t2,
                            double hurst);

enum class GenMethod { dense, fast };

/// One realization on a uniform grid. values is (n+1) x d, time-major;
/// values[0..d) = 0.
struct Path {
  TimeGrid grid;
  int d = 0;
  double hurst = 0.5;
  uint64_t seed = 0;
  uint64_t path_index = 0;
  std::vector<double> values;

  double value(int k, int coord) const { return values[size_t(k) * d + coord]; }

  void write_csv(const std::string& file) const;
  /// 32-byte header: "FBMP", version u8, d u8, n u16, H f64, T f64, seed u64,
  /// all little-endian, followed by the (n+1) x d values coordinate-major.
  void write_binary(const std::string& file) const;
};

struct PathGenConfig {
  int dense_cap = 4096; ///< dense factorization refused above this n
};

/// Samples a path whose d coordinates are independent centered Gaussian
/// vectors with covariance [R(t_i,t_j)]. Output is a pure function of
/// (params, grid, seed, path_index, method).
///
/// dense: covariance factorization with a diagonal jitter ladder up to
/// 1e-10 * trace/n. fast: circulant embedding of the stationary increment
/// covariance followed by cumulative summation; the embedding is
/// nonnegative definite for fractional Gaussian noise, so a failed
/// embedding reports an internal error.
Path generate_path(const ModelParams& params, const TimeGrid& grid,
                   uint64_t seed, uint64_t path_index,
                   GenMethod method = GenMethod::fast,
                   const PathGenConfig& cfg = {});

} // namespace fbmlab
