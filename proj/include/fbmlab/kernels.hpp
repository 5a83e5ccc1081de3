#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "fbmlab/params.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fbmlab {

enum class Region { none, T1, T2, T3 };

const char* region_name(Region r);

/// A point tau = (s, t, s2, t2) of the ordered-pair time domain, optionally
/// tagged with the gap coordinates (a,b,c) of the subregion it came from.
struct TimeQuad {
  double s = 0, t = 0, s2 = 0, t2 = 0;
  Region subregion = Region::none;
  std::optional<std::array<double, 3>> abc;

  void validate() const;
};

struct KernelValues {
  double lambda = 0; ///< (t-s)^{2H}
  double rho = 0;    ///< (t2-s2)^{2H}
  double mu = 0;     ///< increment covariance
  double delta = 0;  ///< lambda*rho - mu^2
};

/// lambda, rho, mu, delta at tau. mu is evaluated from the gap powers
/// |s-t2|, |s2-t|, |t-t2|, |s-s2| directly.
KernelValues kernel_values(const TimeQuad& tau, double hurst);

/// Gap parametrization of the three ordered subregions, base point s:
///   T1: s < s2 < t < t2 with a = s2-s, b = t-s2,  c = t2-t
///   T2: s < s2 < t2 < t with a = s2-s, b = t2-s2, c = t-t2
///   T3: s < t < s2 < t2 with a = t-s,  b = s2-t,  c = t2-s2
TimeQuad subregion_map(const std::array<double, 3>& abc, Region region,
                       double s_base, double horizon);

/// Per-region kernels as functions of the gaps. On T2 the pair labels are
/// exchanged relative to subregion_map's tuple (lambda is the inner
/// interval); the E integrands are symmetrized over the pair exchange, so
/// both labelings integrate identically.
KernelValues region_kernels(Region region, double a, double b, double c,
                            double hurst);

/// (2pi)^{-d} [ ((lambda+eps)(rho+gamma) - mu^2)^{-d/2}
///              - ((lambda+eps)(rho+gamma))^{-d/2} ],
/// evaluated in a cancellation-free form; nonnegative.
double e_integrand(const KernelValues& kv, double eps, double gamma, int d);
double e_integrand(const TimeQuad& tau, double eps, double gamma,
                   const ModelParams& params);

/// (2pi)^{-d} ((lambda+eps)(rho+eps) - mu^2)^{-d/2}.
double second_moment_integrand(const KernelValues& kv, double eps, int d);
double second_moment_integrand(const TimeQuad& tau, double eps,
                               const ModelParams& params);

/// Mean of the approximated self-intersection local time,
/// (2pi)^{-d/2} int_0^T (T-u) (u^{2H}+eps)^{-d/2} du, relative error 1e-10.
double mean_local_time(const ModelParams& params, double eps);

/// (2pi)^{-d/2} int_0^inf (1+v^{2H})^{-d/2} dv, cached per (H,d).
/// Requires dH > 1.
double mean_power_constant(const ModelParams& params);

/// Leading term of the small-eps mean: T C_{H,d} eps^{-d/2+1/(2H)} for
/// 1/d < H < 3/(2d), and T ln(1/eps) / (2H (2pi)^{d/2}) on the critical
/// line H = 1/d.
double mean_asymptotic(const ModelParams& params, double eps);

/// xi(x) = (delta + x rho)^{-(D+1)/2} - ((lambda + x) rho)^{-(D+1)/2}
/// with D = d+1 and the region kernels taken at the gaps; eps_shift is an
/// optional shift of lambda (0 reproduces the plain difference).
double xi(double x, Region region, const std::array<double, 3>& abc,
          double eps_shift, const ModelParams& params);

/// Xi(eps) = rho int_0^eps xi(x) dx, adaptive, relative tolerance 1e-8.
double capital_xi(double eps, Region region, const std::array<double, 3>& abc,
                  const ModelParams& params);

/// Exact int_0^eps (alpha + beta x)^{-m} dx.
double shifted_power_integral(double alpha, double beta, double m, double eps);

/// Ratio of the exact integral to eps^{1/2} alpha^{1/2-m} beta^{-1/2}.
double shifted_power_bound_check(double alpha, double beta, double m, double eps);

// ---- sweep reports ----------------------------------------------------

struct BoundCheckReport {
  std::string check;
  double hurst = 0;
  int d = 0;
  long samples = 0;
  double sup_ratio = 0;
  std::array<double, 4> arg_sup{}; ///< (a, b, c, x-or-eps) at the sup
  uint64_t seed = 0;
  nlohmann::json to_json() const;
};

/// Sampled sup of xi / bound over (abc, x), for the mu^2-weighted bound and
/// the unweighted one. Gap scales are probed by a deterministic corner
/// schedule plus seeded log-uniform sampling so the sup is reproducible.
BoundCheckReport xi_bound_check(const ModelParams& params, Region region,
                                bool mu_weighted, long samples, uint64_t seed);

/// Sampled sup of Xi(eps) / (eps^{1/2} rho^{1/2} (lambda rho)^{-D/2}) and
/// of the mu^2-weighted variant, eps cycling over 2^{-k}.
BoundCheckReport capital_xi_bound_check(const ModelParams& params,
                                        Region region, bool mu_weighted,
                                        long samples, uint64_t seed);

/// Sup of shifted_power_bound_check over a log-spaced (alpha, beta, eps) grid and
/// m in {0.6, 1, 1.5, 2}.
BoundCheckReport shifted_power_sweep();

/// Uniformly sampled tau with minimal gap >= 1e-6 T.
TimeQuad sample_time_quad(const ModelParams& params, uint64_t seed,
                          uint64_t index);

struct DeltaPositivityReport {
  double hurst = 0;
  long samples = 0;
  double min_delta = 0;
  double min_delta_over_lambda_rho = 0;
  uint64_t seed = 0;
  nlohmann::json to_json() const;
};

DeltaPositivityReport delta_positivity_sweep(const ModelParams& params,
                                             long samples, uint64_t seed);

} // namespace fbmlab
