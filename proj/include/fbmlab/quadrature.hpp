#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbmlab/kernels.hpp"
#include "fbmlab/params.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fbmlab {

/// Parameters outside an operation's admissible regime.
struct RegimeError : std::domain_error {
  using std::domain_error::domain_error;
};

/// The requested integral grows without bound.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadConfig {
  double rel_tol = 1e-6;
  long max_cells = 2'000'000;
  double softening_exponent = 3.0; ///< corner substitution a = u^kappa etc.
  double boundary_margin = 0.0;    ///< lower inset of the softened cube

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
      throw std::domain_error("rel_tol must lie in (0,1)");
    if (max_cells < 1) throw std::domain_error("max_cells must be >= 1");
    if (!(softening_exponent >= 1.0))
      throw std::domain_error("softening exponent must be >= 1");
    if (boundary_margin < 0.0 || boundary_margin >= 0.5)
      throw std::domain_error("boundary margin must lie in [0, 0.5)");
  }
};

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  long cells = 0;
  bool converged = false;
  std::array<double, 3> region_breakdown{}; ///< T1, T2, T3 shares of value
};

/// E functional: the covariance-difference integral over ordered time pairs,
/// reduced to weighted gap-variable integrals over {a+b+c < T} per subregion
/// with weight 2 (T-a-b-c) and the integrand symmetrized over the pair
/// exchange (exact for eps != gamma; a no-op for eps == gamma).
/// eps = gamma = 0 requires dH < 3/2, otherwise DivergenceError.
QuadResult compute_e(double eps, double gamma, const ModelParams& params,
                     const QuadConfig& cfg = {});

/// Second moment of the approximated local time, same reduction.
QuadResult compute_second_moment(double eps, const ModelParams& params,
                                 const QuadConfig& cfg = {});

struct RatePoint {
  double eps = 0;
  double delta = 0; ///< squared L2 distance E((L_{eps,c} - L_c)^2)
  double abs_error = 0;
  long cells = 0;
};

struct RateReport {
  ModelParams params;
  std::vector<RatePoint> points;
  double slope = 0;     ///< least-squares slope of log delta vs log eps
  double sup_ratio = 0; ///< max of delta / sqrt(eps) over the ladder
  nlohmann::json to_json() const;
};

/// delta(eps) along a decreasing ladder, evaluated as one combined integrand
/// per point (equals E_ee - 2 E_e0 + E_00 by linearity, without forming the
/// large-value difference). Requires (d+1)H <= 3/2 within 1e-12.
RateReport rate_curve(const ModelParams& params,
                      const std::vector<double>& eps_ladder,
                      const QuadConfig& cfg = {});

struct ProbeLevel {
  int level = 0;
  long cells = 0;
  double value = 0;
};

struct ProbeReport {
  ModelParams params;
  std::vector<ProbeLevel> levels;
  std::vector<double> ratios; ///< successive value ratios
  bool stabilized = false;    ///< last ratio within 2% of 1
  nlohmann::json to_json() const;
};

/// Nested uniform refinements of the eps = gamma = 0 integrand on the
/// softened cube; divergent parameter sets keep growing, convergent ones
/// stabilize. Usable on either side of the finiteness frontier.
ProbeReport divergence_probe(const ModelParams& params, int max_level = 7,
                             const QuadConfig& cfg = {});

struct MeanCurveReport {
  ModelParams params;
  std::vector<std::pair<double, double>> points; ///< (eps, mean)
  double slope = 0; ///< least-squares slope of mean vs ln(1/eps)
  nlohmann::json to_json() const;
};

/// Mean along an eps ladder with the log-divergence slope fit; requires the
/// critical regime H = 1/d.
MeanCurveReport mean_divergence_curve(const ModelParams& params,
                                      const std::vector<double>& eps_ladder);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json quad_result_json(const std::string& operation,
                                const ModelParams& params, double eps,
                                double gamma, const QuadResult& result,
                                const QuadConfig& cfg);

} // namespace fbmlab
