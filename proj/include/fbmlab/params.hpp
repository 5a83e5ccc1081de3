#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fbmlab {

/// Parameters outside an operation's admissible regime.
struct RegimeError : std::domain_error {
  using std::domain_error::domain_error;
};

/// The requested value grows without bound.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Model triple (d, H, T) indexing every experiment.
struct ModelParams {
  int d = 2;          ///< spatial dimension, >= 1
  double hurst = 0.5; ///< Hurst exponent, in (0,1)
  double horizon = 1.0; ///< time horizon T, > 0

  void validate() const {
    if (d < 1) throw std::domain_error("dimension d must be >= 1");
    if (!(hurst > 0.0 && hurst < 1.0))
      throw std::domain_error("Hurst exponent must lie in (0,1)");
    if (!(horizon > 0.0)) throw std::domain_error("horizon T must be > 0");
  }

  double dh() const { return d * hurst; }

  // Regime classification. The critical line dH = 1 is matched to 1e-12.
  bool strong_regime() const { return dh() < 1.0 - 1e-12; }
  bool critical_regime() const { return std::abs(dh() - 1.0) <= 1e-12; }
  bool centered_regime() const { return dh() < 1.5; }
  bool rate_regime() const { return (d + 1) * hurst <= 1.5 + 1e-12; }
};

/// Uniform grid 0 = t_0 < t_1 < ... < t_n = T. Non-uniform grids are not
/// representable by construction.
struct TimeGrid {
  int n = 0;
  double horizon = 0.0;

  static TimeGrid uniform(int n, double horizon) {
    if (n < 1) throw std::domain_error("grid needs at least one step");
    if (!(horizon > 0.0)) throw std::domain_error("horizon T must be > 0");
    return TimeGrid{n, horizon};
  }

  double step() const { return horizon / n; }
  double point(int k) const { return k * horizon / n; }
};

} // namespace fbmlab
