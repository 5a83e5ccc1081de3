#include "fbmlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <nlohmann/json.hpp>

namespace fbmlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Two-point Gauss-Legendre abscissae on [0,1].
constexpr double kGl0 = 0.21132486540518711774542560974902;
constexpr double kGl1 = 0.78867513459481288225457439025098;

struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// (1-q)^{-p} - 1, stable for small q.
inline double powm1_neg(double q, double p) {
  return std::expm1(-p * std::log1p(-q));
}

// Gap powers shared by the three subregions at one (a,b,c).
struct GapPowers {
  double pa, pb, pc, pab, pbc, pabc;
};

inline void region_lrm(const GapPowers& gp, int region, double& lam,
                       double& rho, double& mu) {
  switch (region) {
    case 0:
      lam = gp.pab;
      rho = gp.pbc;
      mu = 0.5 * (gp.pabc + gp.pb - gp.pc - gp.pa);
      break;
    case 1:
      lam = gp.pb;
      rho = gp.pabc;
      mu = 0.5 * (gp.pbc + gp.pab - gp.pc - gp.pa);
      break;
    default:
      lam = gp.pa;
      rho = gp.pc;
      mu = 0.5 * (gp.pabc + gp.pb - gp.pbc - gp.pab);
      break;
  }
}

// Pointwise integrand on the softened cube: maps (u,v,w) in [m,1]^3 to the
// gap simplex, evaluates f per region and returns the three weighted
// contributions (symmetry factor 2 included).
template <class F>
class SimplexIntegrand {
public:
  SimplexIntegrand(const ModelParams& params, const QuadConfig& cfg, F f,
                   bool symmetric)
      : T_(params.horizon),
        h2_(2.0 * params.hurst),
        kappa_(cfg.softening_exponent),
        f_(f),
        symmetric_(symmetric) {}

  std::array<double, 3> eval(double u, double v, double w) const {
    const double x = std::pow(u, kappa_);
    const double y = std::pow(v, kappa_);
    const double z = std::pow(w, kappa_);
    const double a = T_ * x;
    const double rem1 = T_ - a;
    const double b = rem1 * y;
    const double rem2 = rem1 - b;
    const double c = rem2 * z;
    const double base_span = rem2 - c; // T - a - b - c
    const double jac = kappa_ * kappa_ * kappa_ *
                       std::pow(u * v * w, kappa_ - 1.0) * T_ * rem1 * rem2;
    const double weight = 2.0 * base_span * jac;
    if (!(weight > 0.0) || a <= 0.0 || b <= 0.0 || c <= 0.0) return {0, 0, 0};

    GapPowers gp{std::pow(a, h2_),     std::pow(b, h2_),
                 std::pow(c, h2_),     std::pow(a + b, h2_),
                 std::pow(b + c, h2_), std::pow(a + b + c, h2_)};

    std::array<double, 3> out{};
    for (int r = 0; r < 3; ++r) {
      double lam, rho, mu;
      region_lrm(gp, r, lam, rho, mu);
      double val = f_(lam, rho, mu);
      if (!symmetric_) val = 0.5 * (val + f_(rho, lam, mu));
      out[size_t(r)] = weight * val;
    }
    return out;
  }

private:
  double T_, h2_, kappa_;
  F f_;
  bool symmetric_;
};

struct Cell {
  double lo[3];
  double size;
  std::array<double, 3> value{}; // per-region, fine estimate
  double err = 0.0;
  long id = 0;
};

// Tensor 2x2x2 Gauss-Legendre over one cell.
template <class G>
std::array<double, 3> gl8(const G& g, const double lo[3], double size) {
  std::array<double, 3> acc{};
  const double offs[2] = {kGl0 * size, kGl1 * size};
  for (double du : offs)
    for (double dv : offs)
      for (double dw : offs) {
        const auto v = g.eval(lo[0] + du, lo[1] + dv, lo[2] + dw);
        for (int r = 0; r < 3; ++r) acc[size_t(r)] += v[size_t(r)];
      }
  const double vol = size * size * size / 8.0;
  for (auto& a : acc) a *= vol;
  return acc;
}

// Fine estimate: 2x2x2 rule on each octant.
template <class G>
std::array<double, 3> gl8_fine(const G& g, const double lo[3], double size) {
  std::array<double, 3> acc{};
  const double half = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    const double sub[3] = {lo[0] + ((i & 1) ? half : 0.0),
                           lo[1] + ((i & 2) ? half : 0.0),
                           lo[2] + ((i & 4) ? half : 0.0)};
    const auto v = gl8(g, sub, half);
    for (int r = 0; r < 3; ++r) acc[size_t(r)] += v[size_t(r)];
  }
  return acc;
}

template <class G>
QuadResult adaptive_simplex(const G& g, const QuadConfig& cfg) {
  cfg.validate();
  const double m0 = cfg.boundary_margin;

  std::vector<Cell> cells;
  cells.reserve(1024);
  auto make_cell = [&](double a0, double a1, double a2, double size) {
    Cell c;
    c.lo[0] = a0;
    c.lo[1] = a1;
    c.lo[2] = a2;
    c.size = size;
    c.id = long(cells.size());
    const auto coarse = gl8(g, c.lo, size);
    c.value = gl8_fine(g, c.lo, size);
    double ce = 0.0, fe = 0.0;
    for (int r = 0; r < 3; ++r) {
      ce += coarse[size_t(r)];
      fe += c.value[size_t(r)];
    }
    c.err = std::abs(fe - ce);
    cells.push_back(c);
  };

  const int init = 4;
  const double span = (1.0 - m0) / init;
  for (int i = 0; i < init; ++i)
    for (int j = 0; j < init; ++j)
      for (int k = 0; k < init; ++k)
        make_cell(m0 + i * span, m0 + j * span, m0 + k * span, span);

  // worst error first; ties resolved toward the older cell
  auto cmp = [&](long a, long b) {
    if (cells[size_t(a)].err != cells[size_t(b)].err)
      return cells[size_t(a)].err < cells[size_t(b)].err;
    return a > b;
  };
  std::priority_queue<long, std::vector<long>, decltype(cmp)> heap(cmp);
  double total = 0.0, total_err = 0.0;
  for (const auto& c : cells) {
    heap.push(c.id);
    total += c.value[0] + c.value[1] + c.value[2];
    total_err += c.err;
  }

  std::vector<char> live(cells.size(), 1);
  while (long(cells.size()) < cfg.max_cells &&
         total_err > cfg.rel_tol * std::abs(total)) {
    const long worst = heap.top();
    heap.pop();
    Cell parent = cells[size_t(worst)];
    live[size_t(worst)] = 0;
    total -= parent.value[0] + parent.value[1] + parent.value[2];
    total_err -= parent.err;
    const double half = 0.5 * parent.size;
    for (int i = 0; i < 8; ++i) {
      make_cell(parent.lo[0] + ((i & 1) ? half : 0.0),
                parent.lo[1] + ((i & 2) ? half : 0.0),
                parent.lo[2] + ((i & 4) ? half : 0.0), half);
      const Cell& c = cells.back();
      live.push_back(1);
      heap.push(c.id);
      total += c.value[0] + c.value[1] + c.value[2];
      total_err += c.err;
    }
  }

  // fixed-order compensated reduction over the surviving cells
  QuadResult res;
  Kahan v[3], e;
  long n_live = 0;
  for (const auto& c : cells) {
    if (!live[size_t(c.id)]) continue;
    for (int r = 0; r < 3; ++r) v[r].add(c.value[size_t(r)]);
    e.add(c.err);
    ++n_live;
  }
  for (int r = 0; r < 3; ++r) res.region_breakdown[size_t(r)] = v[r].sum;
  res.value = res.region_breakdown[0] + res.region_breakdown[1] +
              res.region_breakdown[2];
  res.abs_error_estimate = e.sum;
  res.cells = n_live;
  res.converged = res.abs_error_estimate <= cfg.rel_tol * std::abs(res.value);
  return res;
}

} // namespace

QuadResult compute_e(double eps, double gamma, const ModelParams& params,
                     const QuadConfig& cfg) {
  params.validate();
  cfg.validate();
  if (eps < 0.0 || gamma < 0.0)
    throw std::domain_error("eps and gamma must be >= 0");
  if (eps == 0.0 && gamma == 0.0 && !(params.dh() < 1.5 - 1e-12))
    throw DivergenceError(
        "E_00 diverges for dH >= 3/2; use divergence-probe instead");

  const double inv2pi_d = std::pow(kTwoPi, -params.d);
  const double half_d = 0.5 * params.d;
  auto f = [=](double lam, double rho, double mu) {
    const double A = (lam + eps) * (rho + gamma);
    return inv2pi_d * std::pow(A, -half_d) * powm1_neg(mu * mu / A, half_d);
  };
  SimplexIntegrand integrand(params, cfg, f, eps == gamma);
  return adaptive_simplex(integrand, cfg);
}

QuadResult compute_second_moment(double eps, const ModelParams& params,
                                 const QuadConfig& cfg) {
  params.validate();
  cfg.validate();
  if (!(eps > 0.0)) throw std::domain_error("second moment needs eps > 0");
  const double inv2pi_d = std::pow(kTwoPi, -params.d);
  const double half_d = 0.5 * params.d;
  auto f = [=](double lam, double rho, double mu) {
    return inv2pi_d * std::pow((lam + eps) * (rho + eps) - mu * mu, -half_d);
  };
  SimplexIntegrand integrand(params, cfg, f, true);
  return adaptive_simplex(integrand, cfg);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit needs >= 2 points");
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

RateReport rate_curve(const ModelParams& params,
                      const std::vector<double>& eps_ladder,
                      const QuadConfig& cfg) {
  params.validate();
  if (!params.rate_regime())
    throw RegimeError("rate requires (d+1)H < 3/2");
  if (eps_ladder.size() < 2)
    throw std::domain_error("rate ladder needs at least two points");
  for (size_t i = 0; i + 1 < eps_ladder.size(); ++i)
    if (!(eps_ladder[i] > eps_ladder[i + 1]))
      throw std::domain_error("rate ladder must decrease");

  const double inv2pi_d = std::pow(kTwoPi, -params.d);
  const double half_d = 0.5 * params.d;

  RateReport rep;
  rep.params = params;
  for (double eps : eps_ladder) {
    if (!(eps > 0.0)) throw std::domain_error("ladder eps must be > 0");
    // delta integrand (f_ee - f_e0) + (f_00 - f_e0); the shared
    // (2pi)^{-d} A^{-d/2} [...] pieces are evaluated in difference form
    auto fpair = [=](double lam, double rho, double mu, double e, double g) {
      const double A = (lam + e) * (rho + g);
      return std::pow(A, -half_d) * powm1_neg(mu * mu / A, half_d);
    };
    auto f = [=](double lam, double rho, double mu) {
      return inv2pi_d *
             (fpair(lam, rho, mu, eps, eps) + fpair(lam, rho, mu, 0.0, 0.0) -
              2.0 * fpair(lam, rho, mu, eps, 0.0));
    };
    SimplexIntegrand integrand(params, cfg, f, false);
    const QuadResult r = adaptive_simplex(integrand, cfg);
    rep.points.push_back({eps, r.value, r.abs_error_estimate, r.cells});
  }

  std::vector<double> lx, ly;
  rep.sup_ratio = 0.0;
  for (const auto& p : rep.points) {
    if (p.delta > 0.0) {
      lx.push_back(std::log(p.eps));
      ly.push_back(std::log(p.delta));
    }
    rep.sup_ratio = std::max(rep.sup_ratio, p.delta / std::sqrt(p.eps));
  }
  rep.slope = fit_slope(lx, ly);
  return rep;
}

ProbeReport divergence_probe(const ModelParams& params, int max_level,
                             const QuadConfig& cfg) {
  params.validate();
  cfg.validate();
  if (max_level < 1 || max_level > 9)
    throw std::domain_error("probe levels must lie in 1..9");

  const double inv2pi_d = std::pow(kTwoPi, -params.d);
  const double half_d = 0.5 * params.d;
  auto f = [=](double lam, double rho, double mu) {
    const double A = lam * rho;
    return inv2pi_d * std::pow(A, -half_d) * powm1_neg(mu * mu / A, half_d);
  };
  SimplexIntegrand integrand(params, cfg, f, true);

  ProbeReport rep;
  rep.params = params;
  for (int level = 1; level <= max_level; ++level) {
    const long m = 1L << level;
    const double h = (1.0 - cfg.boundary_margin) / double(m);
    Kahan acc;
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < m; ++j)
        for (long k = 0; k < m; ++k) {
          const auto v = integrand.eval(cfg.boundary_margin + (i + 0.5) * h,
                                        cfg.boundary_margin + (j + 0.5) * h,
                                        cfg.boundary_margin + (k + 0.5) * h);
          acc.add((v[0] + v[1] + v[2]) * h * h * h);
        }
    rep.levels.push_back({level, m * m * m, acc.sum});
  }
  for (size_t i = 0; i + 1 < rep.levels.size(); ++i)
    rep.ratios.push_back(rep.levels[i + 1].value / rep.levels[i].value);
  rep.stabilized =
      !rep.ratios.empty() && std::abs(rep.ratios.back() - 1.0) <= 0.02;
  return rep;
}

MeanCurveReport mean_divergence_curve(const ModelParams& params,
                                      const std::vector<double>& eps_ladder) {
  params.validate();
  if (!params.critical_regime())
    throw RegimeError("mean-divergence requires the critical line H = 1/d");
  if (eps_ladder.size() < 2)
    throw std::domain_error("ladder needs at least two points");

  MeanCurveReport rep;
  rep.params = params;
  std::vector<double> x, y;
  for (double eps : eps_ladder) {
    const double m = mean_local_time(params, eps);
    rep.points.emplace_back(eps, m);
    x.push_back(std::log(1.0 / eps));
    y.push_back(m);
  }
  rep.slope = fit_slope(x, y);
  return rep;
}

// ---- JSON --------------------------------------------------------------

static nlohmann::json params_json(const ModelParams& p) {
  return {{"d", p.d}, {"H", p.hurst}, {"T", p.horizon}};
}

nlohmann::json quad_result_json(const std::string& operation,
                                const ModelParams& params, double eps,
                                double gamma, const QuadResult& result,
                                const QuadConfig& cfg) {
  return {{"operation", operation},
          {"params", params_json(params)},
          {"eps", eps},
          {"gamma", gamma},
          {"value", result.value},
          {"error", result.abs_error_estimate},
          {"cells", result.cells},
          {"converged", result.converged},
          {"region_breakdown",
           {{"T1", result.region_breakdown[0]},
            {"T2", result.region_breakdown[1]},
            {"T3", result.region_breakdown[2]}}},
          {"config",
           {{"rel_tol", cfg.rel_tol},
            {"max_cells", cfg.max_cells},
            {"softening_exponent", cfg.softening_exponent},
            {"boundary_margin", cfg.boundary_margin}}}};
}

nlohmann::json RateReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points)
    pts.push_back({{"eps", p.eps},
                   {"delta", p.delta},
                   {"error", p.abs_error},
                   {"cells", p.cells}});
  return {{"operation", "rate"},
          {"params", params_json(params)},
          {"points", pts},
          {"slope", slope},
          {"sup_delta_over_sqrt_eps", sup_ratio}};
}

nlohmann::json ProbeReport::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels)
    lv.push_back({{"level", l.level}, {"cells", l.cells}, {"value", l.value}});
  return {{"operation", "divergence-probe"},
          {"params", params_json(params)},
          {"levels", lv},
          {"ratios", ratios},
          {"stabilized", stabilized}};
}

nlohmann::json MeanCurveReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [e, m] : points) pts.push_back({{"eps", e}, {"mean", m}});
  return {{"operation", "mean-divergence"},
          {"params", params_json(params)},
          {"points", pts},
          {"slope", slope}};
}

} // namespace fbmlab
