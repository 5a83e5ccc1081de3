#include "fbmlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "fbmlab/quad1d.hpp"
#include "fbmlab/rng.hpp"

namespace fbmlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

const char* region_name(Region r) {
  switch (r) {
    case Region::T1: return "T1";
    case Region::T2: return "T2";
    case Region::T3: return "T3";
    default: return "none";
  }
}

void TimeQuad::validate() const {
  if (!(s >= 0.0 && s2 >= 0.0)) throw std::domain_error("times must be >= 0");
  if (!(s < t) || !(s2 < t2))
    throw std::domain_error("time quad intervals are degenerate");
}

KernelValues kernel_values(const TimeQuad& tau, double hurst) {
  tau.validate();
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("Hurst exponent must lie in (0,1)");
  const double h2 = 2.0 * hurst;
  KernelValues kv;
  kv.lambda = std::pow(tau.t - tau.s, h2);
  kv.rho = std::pow(tau.t2 - tau.s2, h2);
  kv.mu = 0.5 * (std::pow(std::abs(tau.s - tau.t2), h2) +
                 std::pow(std::abs(tau.s2 - tau.t), h2) -
                 std::pow(std::abs(tau.t - tau.t2), h2) -
                 std::pow(std::abs(tau.s - tau.s2), h2));
  kv.delta = kv.lambda * kv.rho - kv.mu * kv.mu;
  return kv;
}

TimeQuad subregion_map(const std::array<double, 3>& abc, Region region,
                       double s_base, double horizon) {
  const auto [a, b, c] = abc;
  if (!(a > 0.0 && b > 0.0 && c > 0.0))
    throw std::domain_error("gaps must be positive");
  if (s_base < 0.0) throw std::domain_error("base time must be >= 0");
  if (!(s_base + a + b + c < horizon))
    throw std::domain_error("gaps exceed the horizon");

  TimeQuad tau;
  tau.subregion = region;
  tau.abc = abc;
  const double s = s_base;
  switch (region) {
    case Region::T1:
      tau = {s, s + a + b, s + a, s + a + b + c, region, abc};
      break;
    case Region::T2:
      tau = {s, s + a + b + c, s + a, s + a + b, region, abc};
      break;
    case Region::T3:
      tau = {s, s + a, s + a + b, s + a + b + c, region, abc};
      break;
    default:
      throw std::domain_error("subregion_map needs T1, T2 or T3");
  }
  return tau;
}

KernelValues region_kernels(Region region, double a, double b, double c,
                            double hurst) {
  const double h2 = 2.0 * hurst;
  const double pa = std::pow(a, h2), pb = std::pow(b, h2), pc = std::pow(c, h2);
  const double pab = std::pow(a + b, h2);
  const double pbc = std::pow(b + c, h2);
  const double pabc = std::pow(a + b + c, h2);

  KernelValues kv;
  switch (region) {
    case Region::T1:
      kv.lambda = pab;
      kv.rho = pbc;
      kv.mu = 0.5 * (pabc + pb - pc - pa);
      break;
    case Region::T2:
      kv.lambda = pb;
      kv.rho = pabc;
      kv.mu = 0.5 * (pbc + pab - pc - pa);
      break;
    case Region::T3:
      kv.lambda = pa;
      kv.rho = pc;
      kv.mu = 0.5 * (pabc + pb - pbc - pab);
      break;
    default:
      throw std::domain_error("region kernels need T1, T2 or T3");
  }
  kv.delta = kv.lambda * kv.rho - kv.mu * kv.mu;
  return kv;
}

// (1-q)^{-p} - 1 without cancellation for small q.
static double powm1_neg(double q, double p) {
  return std::expm1(-p * std::log1p(-q));
}

double e_integrand(const KernelValues& kv, double eps, double gamma, int d) {
  if (eps < 0.0 || gamma < 0.0)
    throw std::domain_error("eps and gamma must be >= 0");
  const double A = (kv.lambda + eps) * (kv.rho + gamma);
  const double q = kv.mu * kv.mu / A;
  if (!(q < 1.0))
    throw std::runtime_error(
        "singular integrand: (lambda+eps)(rho+gamma) <= mu^2");
  return std::pow(kTwoPi, -d) * std::pow(A, -0.5 * d) * powm1_neg(q, 0.5 * d);
}

double e_integrand(const TimeQuad& tau, double eps, double gamma,
                   const ModelParams& params) {
  return e_integrand(kernel_values(tau, params.hurst), eps, gamma, params.d);
}

double second_moment_integrand(const KernelValues& kv, double eps, int d) {
  if (!(eps > 0.0)) throw std::domain_error("second moment needs eps > 0");
  const double A = (kv.lambda + eps) * (kv.rho + eps);
  const double q = kv.mu * kv.mu / A;
  if (!(q < 1.0)) throw std::runtime_error("singular integrand");
  return std::pow(kTwoPi, -d) * std::pow(A - kv.mu * kv.mu, -0.5 * d);
}

double second_moment_integrand(const TimeQuad& tau, double eps,
                               const ModelParams& params) {
  return second_moment_integrand(kernel_values(tau, params.hurst), eps,
                                 params.d);
}

double mean_local_time(const ModelParams& params, double eps) {
  params.validate();
  if (!(eps > 0.0)) throw std::domain_error("mean needs eps > 0");
  const double T = params.horizon;
  const double h2 = 2.0 * params.hurst;
  const double half_d = 0.5 * params.d;
  auto f = [&](double u) {
    return (T - u) * std::pow(std::pow(u, h2) + eps, -half_d);
  };
  const double inner = std::pow(eps, 1.0 / h2);
  quad1d::Options opt;
  opt.rel_tol = 1e-11;
  const double v = quad1d::integrate(f, quad1d::geometric_split(inner, T), opt);
  return std::pow(kTwoPi, -half_d) * v;
}

double mean_power_constant(const ModelParams& params) {
  params.validate();
  if (!(params.dh() > 1.0 + 1e-12))
    throw std::domain_error("power constant needs dH > 1");

  static std::mutex mu;
  static std::map<std::pair<int, long long>, double> cache;
  const auto key = std::make_pair(params.d, llround(params.hurst * 1e15));
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  const double h2 = 2.0 * params.hurst;
  const double half_d = 0.5 * params.d;
  const double dh = params.dh();
  quad1d::Options opt;
  opt.rel_tol = 1e-12;
  auto near = [&](double v) { return std::pow(1.0 + std::pow(v, h2), -half_d); };
  // tail mapped back to (0,1]: w^{dH-2} (1 + w^{2H})^{-d/2}
  auto far = [&](double w) {
    return std::pow(w, dh - 2.0) * std::pow(1.0 + std::pow(w, h2), -half_d);
  };
  const double v = quad1d::integrate(near, 0.0, 1.0, opt) +
                   quad1d::integrate(far, quad1d::geometric_split(1e-8, 1.0), opt);
  const double c = std::pow(kTwoPi, -half_d) * v;

  std::lock_guard<std::mutex> lock(mu);
  cache[key] = c;
  return c;
}

double mean_asymptotic(const ModelParams& params, double eps) {
  params.validate();
  if (!(eps > 0.0)) throw std::domain_error("asymptotic needs eps > 0");
  const double inv_d = 1.0 / params.d;
  if (params.critical_regime()) {
    return params.horizon / (2.0 * params.hurst * std::pow(kTwoPi, 0.5 * params.d)) *
           std::log(1.0 / eps);
  }
  if (params.hurst > inv_d + 1e-12 && params.hurst < 1.5 * inv_d - 1e-12) {
    return params.horizon * mean_power_constant(params) *
           std::pow(eps, -0.5 * params.d + 0.5 / params.hurst);
  }
  throw std::domain_error(
      "mean asymptotics need H = 1/d (log case) or 1/d < H < 3/(2d) (power case)");
}

double xi(double x, Region region, const std::array<double, 3>& abc,
          double eps_shift, const ModelParams& params) {
  if (x < 0.0 || eps_shift < 0.0)
    throw std::domain_error("x and eps_shift must be >= 0");
  if (region != Region::T2 && region != Region::T3)
    throw std::domain_error("xi is defined on T2 and T3");
  const auto kv = region_kernels(region, abc[0], abc[1], abc[2], params.hurst);
  const double lam = kv.lambda + eps_shift;
  const double p = 0.5 * (params.d + 2); // (D+1)/2 with D = d+1
  const double A = (lam + x) * kv.rho;
  const double q = kv.mu * kv.mu / A;
  return std::pow(A, -p) * powm1_neg(q, p);
}

double capital_xi(double eps, Region region, const std::array<double, 3>& abc,
                  const ModelParams& params) {
  if (!(eps > 0.0)) throw std::domain_error("capital xi needs eps > 0");
  const auto kv = region_kernels(region, abc[0], abc[1], abc[2], params.hurst);
  auto f = [&](double x) { return xi(x, region, abc, 0.0, params); };
  // xi varies on the scale where x*rho overtakes delta
  const double knee = std::max(kv.delta / kv.rho, eps * 1e-12);
  quad1d::Options opt;
  opt.rel_tol = 1e-8;
  return kv.rho * quad1d::integrate(f, quad1d::geometric_split(knee, eps), opt);
}

double shifted_power_integral(double alpha, double beta, double m, double eps) {
  if (!(alpha > 0.0 && beta > 0.0 && eps > 0.0))
    throw std::domain_error("alpha, beta, eps must be > 0");
  if (!(m > 0.5)) throw std::domain_error("exponent m must exceed 1/2");
  if (std::abs(m - 1.0) < 1e-12)
    return std::log1p(beta * eps / alpha) / beta;
  return (std::pow(alpha + beta * eps, 1.0 - m) - std::pow(alpha, 1.0 - m)) /
         (beta * (1.0 - m));
}

double shifted_power_bound_check(double alpha, double beta, double m, double eps) {
  const double bound =
      std::sqrt(eps) * std::pow(alpha, 0.5 - m) / std::sqrt(beta);
  return shifted_power_integral(alpha, beta, m, eps) / bound;
}

// ---- sweeps ------------------------------------------------------------

TimeQuad sample_time_quad(const ModelParams& params, uint64_t seed,
                          uint64_t index) {
  const double T = params.horizon;
  const double min_gap = 1e-6 * T;
  rng::CounterStream st(seed, index, 0, rng::StreamKind::sample_sweep);
  for (uint64_t attempt = 0;; ++attempt) {
    const uint64_t base = attempt * 4;
    double u0 = st.uniform(base) * T, u1 = st.uniform(base + 1) * T;
    double u2 = st.uniform(base + 2) * T, u3 = st.uniform(base + 3) * T;
    TimeQuad tau{std::min(u0, u1), std::max(u0, u1), std::min(u2, u3),
                 std::max(u2, u3)};
    if (tau.t - tau.s < min_gap || tau.t2 - tau.s2 < min_gap) continue;
    return tau;
  }
}

namespace {

// Deterministic log-scale corner probes shared by every seed, then seeded
// log-uniform gaps; the sup statistic is dominated by the probes, which
// keeps it reproducible run to run.
class GapSchedule {
public:
  GapSchedule(double horizon, uint64_t seed)
      : T_(horizon), st_(seed, 0, 1, rng::StreamKind::sample_sweep) {
    // the probe grid reaches the extreme corners of the sampled domain
    // (seeded exploration below stays inside 0.45 T), so the sup statistic
    // is pinned by the shared probes
    static constexpr double levels[7] = {1e-6, 1e-5, 1e-4, 1e-2, 0.1, 0.3, 0.49};
    for (double la : levels)
      for (double lb : levels)
        for (double lc : levels) {
          std::array<double, 3> g{la * T_, lb * T_, lc * T_};
          if (g[0] + g[1] + g[2] < T_) probes_.push_back(g);
        }
  }

  std::array<double, 3> gaps(long i) {
    if (size_t(i) < probes_.size()) return probes_[size_t(i)];
    const double lo = std::log(1e-6 * T_), hi = std::log(0.45 * T_);
    for (uint64_t attempt = 0;; ++attempt) {
      const uint64_t base = (uint64_t(i) << 8) + attempt * 3;
      std::array<double, 3> g;
      for (int k = 0; k < 3; ++k)
        g[size_t(k)] = std::exp(lo + (hi - lo) * st_.uniform(base + uint64_t(k)));
      if (g[0] + g[1] + g[2] < T_) return g;
    }
  }

  bool is_probe(long i) const { return size_t(i) < probes_.size(); }

private:
  double T_;
  rng::CounterStream st_;
  std::vector<std::array<double, 3>> probes_;
};

} // namespace

BoundCheckReport xi_bound_check(const ModelParams& params, Region region,
                                bool mu_weighted, long samples, uint64_t seed) {
  params.validate();
  const double p = 0.5 * (params.d + 2);
  GapSchedule sched(params.horizon, seed);
  const double lam_scale = std::pow(params.horizon, 2.0 * params.hurst);

  BoundCheckReport rep;
  rep.check = mu_weighted ? "xi_mu_weighted" : "xi_plain";
  rep.check += std::string("_") + region_name(region);
  rep.hurst = params.hurst;
  rep.d = params.d;
  rep.samples = samples;
  rep.seed = seed;

  for (long i = 0; i < samples; ++i) {
    const auto g = sched.gaps(i);
    // probes sit at x = 0 where the ratio peaks; in the random block every
    // fourth point stays at x = 0 and the rest sweep x across scales
    const double x =
        (sched.is_probe(i) || i % 4 == 0)
            ? 0.0
            : lam_scale * std::pow(10.0, -6.0 + 6.0 * std::fmod(0.6180339887498949 * double(i), 1.0));
    const auto kv = region_kernels(region, g[0], g[1], g[2], params.hurst);
    const double A = (kv.lambda + x) * kv.rho;
    const double val = std::pow(A, -p) * powm1_neg(kv.mu * kv.mu / A, p);
    double bound;
    if (mu_weighted) {
      if (kv.mu == 0.0) continue;
      bound = kv.mu * kv.mu * std::pow(A, -p - 1.0);
    } else {
      bound = std::pow(A, -p);
    }
    const double ratio = val / bound;
    if (ratio > rep.sup_ratio) {
      rep.sup_ratio = ratio;
      rep.arg_sup = {g[0], g[1], g[2], x};
    }
  }
  return rep;
}

BoundCheckReport capital_xi_bound_check(const ModelParams& params,
                                        Region region, bool mu_weighted,
                                        long samples, uint64_t seed) {
  params.validate();
  const double D = params.d + 1.0;
  GapSchedule sched(params.horizon, seed);

  BoundCheckReport rep;
  rep.check = mu_weighted ? "capital_xi_mu_weighted" : "capital_xi_plain";
  rep.check += std::string("_") + region_name(region);
  rep.hurst = params.hurst;
  rep.d = params.d;
  rep.samples = samples;
  rep.seed = seed;

  for (long i = 0; i < samples; ++i) {
    const auto g = sched.gaps(i);
    const double eps = std::pow(2.0, -double(2 + (i % 11)));
    const auto kv = region_kernels(region, g[0], g[1], g[2], params.hurst);
    const double cx = capital_xi(eps, region, g, params);
    double bound = std::sqrt(eps) * std::sqrt(kv.rho);
    if (mu_weighted) {
      if (kv.mu == 0.0) continue;
      bound *= kv.mu * kv.mu * std::pow(kv.lambda * kv.rho, -0.5 * (D + 2.0));
    } else {
      bound *= std::pow(kv.lambda * kv.rho, -0.5 * D);
    }
    const double ratio = cx / bound;
    if (ratio > rep.sup_ratio) {
      rep.sup_ratio = ratio;
      rep.arg_sup = {g[0], g[1], g[2], eps};
    }
  }
  return rep;
}

BoundCheckReport shifted_power_sweep() {
  BoundCheckReport rep;
  rep.check = "shifted_power";
  rep.samples = 0;
  static constexpr double ms[4] = {0.6, 1.0, 1.5, 2.0};
  for (double m : ms)
    for (int ia = -3; ia <= 3; ++ia)
      for (int ib = -3; ib <= 3; ++ib)
        for (int ie = -4; ie <= 0; ++ie) {
          const double alpha = std::pow(10.0, ia);
          const double beta = std::pow(10.0, ib);
          const double eps = std::pow(10.0, ie);
          const double r = shifted_power_bound_check(alpha, beta, m, eps);
          ++rep.samples;
          if (r > rep.sup_ratio) {
            rep.sup_ratio = r;
            rep.arg_sup = {alpha, beta, m, eps};
          }
        }
  return rep;
}

DeltaPositivityReport delta_positivity_sweep(const ModelParams& params,
                                             long samples, uint64_t seed) {
  DeltaPositivityReport rep;
  rep.hurst = params.hurst;
  rep.samples = samples;
  rep.seed = seed;
  rep.min_delta = std::numeric_limits<double>::infinity();
  rep.min_delta_over_lambda_rho = std::numeric_limits<double>::infinity();
  for (long i = 0; i < samples; ++i) {
    const auto tau = sample_time_quad(params, seed, uint64_t(i));
    const auto kv = kernel_values(tau, params.hurst);
    rep.min_delta = std::min(rep.min_delta, kv.delta);
    rep.min_delta_over_lambda_rho =
        std::min(rep.min_delta_over_lambda_rho, kv.delta / (kv.lambda * kv.rho));
  }
  return rep;
}

nlohmann::json BoundCheckReport::to_json() const {
  return {{"check", check},   {"H", hurst},
          {"d", d},           {"samples", samples},
          {"sup_ratio", sup_ratio}, {"arg_sup", arg_sup},
          {"seed", seed}};
}

nlohmann::json DeltaPositivityReport::to_json() const {
  return {{"check", "delta_positivity"},
          {"H", hurst},
          {"samples", samples},
          {"min_delta", min_delta},
          {"min_delta_over_lambda_rho", min_delta_over_lambda_rho},
          {"seed", seed}};
}

} // namespace fbmlab
