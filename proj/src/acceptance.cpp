#include "fbmlab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fbmlab/fbm.hpp"
#include "fbmlab/kernels.hpp"
#include "fbmlab/local_time.hpp"
#include "fbmlab/mc.hpp"
#include "fbmlab/quadrature.hpp"

namespace fbmlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// 4D midpoint rule over the product of ordered-time triangles: full-weight
// interior cells sampled at centers, half-weight diagonal cells sampled at
// the triangle centroid of their admissible half. Works straight from the
// pointwise integrand, independent of the gap-variable reduction.
double brute_force_e(double eps, double gamma, const ModelParams& params,
                     int m) {
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

using Clock = std::chrono::steady_clock;

struct Runner {
  std::vector<CriterionResult>& out;

  void run(int id, const std::string& name,
           const std::function<std::pair<bool, std::string>()>& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    const auto t0 = Clock::now();
    try {
      auto [ok, detail] = body();
      r.passed = ok;
      r.detail = detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.elapsed_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    out.push_back(r);
  }
};

} // namespace

AcceptanceReport run_acceptance(const std::string& suite, int threads) {
  if (suite != "fast" && suite != "full")
    throw std::domain_error("suite must be 'fast' or 'full'");
  const bool full = suite == "full";

  AcceptanceReport rep;
  rep.suite = suite;
  Runner run{rep.criteria};

  // 1: increment-covariance identity across Hurst values
  run.run(1, "mu-identity", [&] {
    double worst = 0.0;
    for (double H : {0.2, 1.0 / 3.0, 0.45, 0.5}) {
      const ModelParams p{2, H, 1.0};
      const double scale0 = std::pow(p.horizon, 2.0 * H);
      for (long i = 0; i < 10'000; ++i) {
        const TimeQuad tau = sample_time_quad(p, 2024, uint64_t(i));
        const double a = kernel_values(tau, H).mu;
        const double b = increment_covariance(tau.s, tau.t, tau.s2, tau.t2, H);
        const double rel = std::abs(a - b) /
                           std::max({scale0, std::abs(a), std::abs(b)});
        worst = std::max(worst, rel);
      }
    }
    return std::make_pair(worst <= 1e-12,
                          "max relative deviation " + fmt(worst));
  });

  // 2: closed-form mean at (d=2, H=1/2, T=1, eps=0.1)
  run.run(2, "mean-closed-form", [&] {
    const double v = mean_local_time({2, 0.5, 1.0}, 0.1);
    const double want = (1.1 * std::log(11.0) - 1.0) / kTwoPi;
    return std::make_pair(std::abs(v - want) <= 1e-6,
                          "mean " + fmt(v) + " vs closed form " + fmt(want));
  });

  // 3: log-divergence slope of the mean on the critical line
  run.run(3, "mean-log-slope", [&] {
    auto slope_for = [&](const ModelParams& p) {
      std::vector<double> x, y;
      for (int k = 8; k <= 16; ++k) {
        const double eps = std::pow(10.0, -0.5 * k);
        x.push_back(std::log(1.0 / eps));
        y.push_back(mean_local_time(p, eps));
      }
      return fit_slope(x, y);
    };
    const double s2 = slope_for({2, 0.5, 1.0});
    const double c2 = 1.0 / kTwoPi;
    const double s3 = slope_for({3, 1.0 / 3.0, 1.0});
    const double c3 = 1.0 / ((2.0 / 3.0) * std::pow(kTwoPi, 1.5));
    const bool ok =
        std::abs(s2 / c2 - 1.0) <= 0.05 && std::abs(s3 / c3 - 1.0) <= 0.05;
    return std::make_pair(ok, "slopes " + fmt(s2) + " (want " + fmt(c2) +
                                  "), " + fmt(s3) + " (want " + fmt(c3) + ")");
  });

  // 4: power-regime ratio of the mean to its leading asymptotic
  run.run(4, "mean-power-ratio", [&] {
    const ModelParams p{2, 0.6, 1.0};
    const double ratio =
        mean_local_time(p, 1e-8) / mean_asymptotic(p, 1e-8);
    return std::make_pair(ratio >= 0.98 && ratio <= 1.02,
                          "ratio " + fmt(ratio) + " (window [0.98, 1.02])");
  });

  // 5: gap-variable reduction against 4D brute force
  run.run(5, "reduction-oracle", [&] {
    QuadConfig cfg;
    cfg.rel_tol = 1e-5;
    cfg.max_cells = 300'000;
    bool ok = true;
    std::string detail;
    for (double H : {0.4, 0.5}) {
      const ModelParams p{2, H, 1.0};
      const QuadResult red = compute_e(0.05, 0.05, p, cfg);
      const double b24 = brute_force_e(0.05, 0.05, p, 24);
      const double b12 = brute_force_e(0.05, 0.05, p, 12);
      const double budget = red.abs_error_estimate + std::abs(b24 - b12);
      const double dev = std::abs(red.value - b24);
      ok = ok && dev <= budget;
      detail += "H=" + fmt(H) + ": |" + fmt(red.value) + " - " + fmt(b24) +
                "| = " + fmt(dev) + " <= " + fmt(budget) + "; ";
    }
    return std::make_pair(ok, detail);
  });

  // 6: Monte Carlo cross-validation of mean and variance
  ExperimentSpec c6;
  c6.params = {2, 0.4, 1.0};
  c6.eps = 0.1;
  c6.grid_n = 512;
  c6.n_paths = 10'000;
  c6.seed = 2;
  c6.threads = threads;
  ExperimentReport c6_rep;
  run.run(6, "mc-cross-validation", [&] {
    c6_rep = run_experiment(c6);
    const McEstimate& mean = *c6_rep.find("mean_local_time");
    const McEstimate& var = *c6_rep.find("var_local_time");
    const double qmean = mean_local_time(c6.params, c6.eps);
    const double qvar = compute_e(c6.eps, c6.eps, c6.params).value;
    const bool ok_mean = std::abs(mean.mean - qmean) <= 3.0 * mean.std_error;
    const bool ok_var = std::abs(var.mean - qvar) <= 3.0 * var.std_error;
    return std::make_pair(
        ok_mean && ok_var,
        "mean " + fmt(mean.mean) + " vs " + fmt(qmean) + " (3SE " +
            fmt(3 * mean.std_error) + "); var " + fmt(var.mean) + " vs " +
            fmt(qvar) + " (3SE " + fmt(3 * var.std_error) + ")");
  });

  // 7: square-root rate envelope of the centered L2 distance
  if (full)
    run.run(7, "rate-envelope", [&] {
      QuadConfig cfg;
      cfg.rel_tol = 5e-5;
      cfg.max_cells = 1'500'000;
      std::vector<double> ladder;
      for (int k = 2; k <= 10; ++k) ladder.push_back(std::pow(2.0, -k));
      const RateReport rr = rate_curve({2, 0.5, 1.0}, ladder, cfg);
      bool positive = true, decreasing = true;
      for (size_t i = 0; i < rr.points.size(); ++i) {
        positive = positive && rr.points[i].delta > 0.0;
        if (i) decreasing = decreasing &&
                            rr.points[i].delta < rr.points[i - 1].delta;
      }
      double hi = 0.0, lo = std::numeric_limits<double>::infinity();
      for (size_t i = rr.points.size() - 4; i < rr.points.size(); ++i) {
        const double r = rr.points[i].delta / std::sqrt(rr.points[i].eps);
        hi = std::max(hi, r);
        lo = std::min(lo, r);
      }
      const bool ok =
          positive && decreasing && rr.slope >= 0.45 && hi / lo < 3.0;
      return std::make_pair(ok, "slope " + fmt(rr.slope) +
                                    ", last-4 ratio spread " + fmt(hi / lo) +
                                    ", positive=" + (positive ? "y" : "n") +
                                    ", decreasing=" + (decreasing ? "y" : "n"));
    });

  // 8: sign of E(eps,eps) - E(eps,0)
  run.run(8, "e-sign", [&] {
    const ModelParams p{2, 0.5, 1.0};
    bool ok = true;
    std::string detail;
    for (double eps : {0.1, 0.01}) {
      const QuadResult a = compute_e(eps, eps, p);
      const QuadResult b = compute_e(eps, 0.0, p);
      const double slack = a.abs_error_estimate + b.abs_error_estimate;
      ok = ok && a.value <= b.value + slack;
      detail += "eps=" + fmt(eps) + ": " + fmt(a.value) + " <= " +
                fmt(b.value) + "; ";
    }
    return std::make_pair(ok, detail);
  });

  // 9: finiteness frontier probes
  if (full)
    run.run(9, "finiteness-frontier", [&] {
      const ProbeReport grow = divergence_probe({3, 0.6, 1.0}, 7);
      const ProbeReport stab = divergence_probe({2, 0.5, 1.0}, 7);
      double min_growth = std::numeric_limits<double>::infinity();
      for (size_t i = grow.ratios.size() - 3; i < grow.ratios.size(); ++i)
        min_growth = std::min(min_growth, grow.ratios[i]);
      const bool ok = min_growth >= 1.10 && stab.stabilized;
      return std::make_pair(
          ok, "divergent min ratio " + fmt(min_growth) +
                  ", convergent last ratio " + fmt(stab.ratios.back()));
    });

  // 10: integral-inequality sweeps, two seeds
  run.run(10, "bound-sweeps", [&] {
    const BoundCheckReport sp = shifted_power_sweep();
    bool ok = std::isfinite(sp.sup_ratio) && sp.sup_ratio <= 2.5;
    std::string detail = "shifted-power sup " + fmt(sp.sup_ratio) + "; ";
    for (const ModelParams p : {ModelParams{2, 0.45, 1.0}, ModelParams{3, 0.3, 1.0}}) {
      double worst_spread = 0.0;
      for (Region reg : {Region::T2, Region::T3}) {
        for (bool mu_weighted : {false, true}) {
          const auto x1 = xi_bound_check(p, reg, mu_weighted, 10'000, 12345);
          const auto x2 = xi_bound_check(p, reg, mu_weighted, 10'000, 67890);
          const auto c1 = capital_xi_bound_check(p, reg, mu_weighted, 10'000, 12345);
          const auto c2 = capital_xi_bound_check(p, reg, mu_weighted, 10'000, 67890);
          for (const auto* r : {&x1, &x2, &c1, &c2})
            ok = ok && std::isfinite(r->sup_ratio) && r->sup_ratio > 0.0;
          const double dx = std::abs(x1.sup_ratio - x2.sup_ratio) /
                            std::max(x1.sup_ratio, x2.sup_ratio);
          const double dc = std::abs(c1.sup_ratio - c2.sup_ratio) /
                            std::max(c1.sup_ratio, c2.sup_ratio);
          ok = ok && dx <= 0.10 && dc <= 0.10;
          worst_spread = std::max({worst_spread, dx, dc});
        }
      }
      detail += "d=" + std::to_string(p.d) + " H=" + fmt(p.hurst) +
                " worst seed spread " + fmt(worst_spread) + "; ";
    }
    return std::make_pair(ok, detail);
  });

  // 11: Edwards integrability surrogates
  ExperimentSpec c11a;
  c11a.params = {2, 0.4, 1.0};
  c11a.eps = 0.1;
  c11a.grid_n = 512;
  c11a.n_paths = 10'000;
  c11a.g_list = {0.0, 1.0, 5.0, 25.0};
  c11a.center_mode = CenterMode::none;
  c11a.seed = 7;
  c11a.threads = threads;
  std::vector<ExperimentSpec> c11b;
  for (double eps : {0.1, 0.05, 0.025}) {
    ExperimentSpec s;
    s.params = {2, 0.5, 1.0};
    s.eps = eps;
    s.grid_n = 512;
    s.n_paths = 10'000;
    s.g_list = {0.1};
    s.center_mode = CenterMode::quadrature_mean;
    s.seed = 11;
    s.threads = threads;
    c11b.push_back(s);
  }
  ExperimentReport c11a_rep;
  std::vector<ExperimentReport> c11b_reps;
  run.run(11, "edwards-surrogates", [&] {
    c11a_rep = run_experiment(c11a);
    const auto curve = edwards_curve(c11a_rep, false);
    bool ok = curve.size() == 4;
    for (size_t i = 0; i < curve.size(); ++i) {
      ok = ok && std::isfinite(curve[i].second.mean);
      if (i) ok = ok && curve[i].second.mean < curve[i - 1].second.mean;
    }
    std::string detail = "uncentered curve:";
    for (const auto& [g, est] : curve) detail += " " + fmt(est.mean);
    for (const auto& s : c11b) c11b_reps.push_back(run_experiment(s));
    detail += "; centered along eps:";
    for (size_t i = 0; i < c11b_reps.size(); ++i) {
      const auto cur = edwards_curve(c11b_reps[i], true);
      ok = ok && cur.size() == 1 && std::isfinite(cur[0].second.mean);
      detail += " " + fmt(cur[0].second.mean);
      if (i) {
        const auto prev = edwards_curve(c11b_reps[i - 1], true);
        const double gap = std::abs(cur[0].second.mean - prev[0].second.mean);
        const double slack =
            3.0 * (cur[0].second.std_error + prev[0].second.std_error);
        ok = ok && gap <= slack;
      }
    }
    return std::make_pair(ok, detail);
  });

  // 12: worker-count determinism of the reports above
  if (full)
    run.run(12, "worker-determinism", [&] {
      auto identical_at_1_and_8 = [](ExperimentSpec s) {
        s.threads = 1;
        const std::string one = run_experiment(s).to_json().dump();
        s.threads = 8;
        return one == run_experiment(s).to_json().dump();
      };
      bool ok = identical_at_1_and_8(c6) && identical_at_1_and_8(c11a);
      for (const auto& s : c11b) ok = ok && identical_at_1_and_8(s);
      return std::make_pair(ok, std::string(ok ? "reports byte-identical at 1 and 8 workers"
                                               : "reports differ between worker counts"));
    });

  rep.all_passed = true;
  for (const auto& c : rep.criteria) rep.all_passed = rep.all_passed && c.passed;
  return rep;
}

nlohmann::json AcceptanceReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : criteria)
    arr.push_back({{"id", c.id},
                   {"name", c.name},
                   {"passed", c.passed},
                   {"detail", c.detail},
                   {"elapsed_ms", c.elapsed_ms}});
  return {{"suite", suite}, {"criteria", arr}, {"all_passed", all_passed}};
}

} // namespace fbmlab
