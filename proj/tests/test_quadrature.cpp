#include <doctest.h>

#include <cmath>

#include "fbmlab/quadrature.hpp"
#include "support/brute_force.hpp"

using namespace fbmlab;

TEST_CASE("reduction agrees with the 4D oracle at equal widths") {
  QuadConfig cfg;
  cfg.rel_tol = 1e-5;
  cfg.max_cells = 200'000;
  for (double H : {0.4, 0.5}) {
    const ModelParams p{2, H, 1.0};
    const QuadResult red = compute_e(0.05, 0.05, p, cfg);
    const double b16 = testing::brute_force_e(0.05, 0.05, p, 16);
    const double b8 = testing::brute_force_e(0.05, 0.05, p, 8);
    CHECK(std::abs(red.value - b16) <=
          red.abs_error_estimate + std::abs(b16 - b8));
  }
}

TEST_CASE("reduction agrees with the 4D oracle at unequal widths") {
  // the pair-exchange symmetrization is what makes this exact
  QuadConfig cfg;
  cfg.rel_tol = 1e-5;
  cfg.max_cells = 200'000;
  const ModelParams p{2, 0.4, 1.0};
  const QuadResult red = compute_e(0.05, 0.02, p, cfg);
  const double b16 = testing::brute_force_e(0.05, 0.02, p, 16);
  const double b8 = testing::brute_force_e(0.05, 0.02, p, 8);
  CHECK(std::abs(red.value - b16) <=
        red.abs_error_estimate + std::abs(b16 - b8));
}

TEST_CASE("symmetry in the two widths") {
  const ModelParams p{2, 0.45, 1.0};
  QuadConfig cfg;
  cfg.rel_tol = 1e-6;
  for (auto [e, g] : std::initializer_list<std::pair<double, double>>{
           {0.1, 0.02}, {0.3, 0.07}, {0.05, 0.5}, {0.01, 0.2}, {1.0, 0.001}}) {
    const double a = compute_e(e, g, p, cfg).value;
    const double b = compute_e(g, e, p, cfg).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("results are deterministic and additive over regions") {
  const ModelParams p{2, 0.5, 1.0};
  const QuadResult a = compute_e(0.1, 0.0, p);
  const QuadResult b = compute_e(0.1, 0.0, p);
  CHECK(a.value == b.value);
  CHECK(a.cells == b.cells);
  CHECK(a.value == doctest::Approx(a.region_breakdown[0] +
                                   a.region_breakdown[1] +
                                   a.region_breakdown[2])
                       .epsilon(1e-12));
  CHECK(a.value >= 0.0);
  for (double r : a.region_breakdown) CHECK(r >= 0.0);
}

TEST_CASE("cell budget exhaustion is reported, not hidden") {
  const ModelParams p{2, 0.5, 1.0};
  QuadConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.max_cells = 200;
  const QuadResult r = compute_e(0.0, 0.0, p, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.cells <= 200 + 8);
}

TEST_CASE("equal-width value never exceeds the one-sided value") {
  const ModelParams p{2, 0.5, 1.0};
  for (double eps : {0.1, 0.01}) {
    const QuadResult a = compute_e(eps, eps, p);
    const QuadResult b = compute_e(eps, 0.0, p);
    CHECK(a.value <= b.value + a.abs_error_estimate + b.abs_error_estimate);
  }
}

TEST_CASE("second moment identity and monotonicity") {
  const ModelParams p{2, 0.4, 1.0};
  QuadConfig cfg;
  cfg.rel_tol = 1e-6;
  const double eps = 0.1;
  const double m2 = compute_second_moment(eps, p, cfg).value;
  const double var = compute_e(eps, eps, p, cfg).value;
  const double mean = mean_local_time(p, eps);
  CHECK(m2 == doctest::Approx(var + mean * mean).epsilon(1e-4));

  CHECK(compute_second_moment(0.05, p, cfg).value >= m2);
  CHECK(compute_second_moment(1e6, p, cfg).value < 1e-10);
}

TEST_CASE("uncentered family is Cauchy for dH < 1") {
  const ModelParams p{2, 0.4, 1.0};
  QuadConfig cfg;
  cfg.rel_tol = 1e-6;
  double prev = 1e300;
  for (int k = 3; k <= 6; ++k) {
    const double eps = std::pow(2.0, -k);
    const double d2 = compute_e(eps, eps, p, cfg).value -
                      2.0 * compute_e(eps, eps / 2, p, cfg).value +
                      compute_e(eps / 2, eps / 2, p, cfg).value;
    CHECK(d2 > -1e-8); // an L2 norm up to quadrature error
    CHECK(d2 < prev);
    prev = d2;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("zero-width value is rejected past the finiteness frontier") {
  CHECK_THROWS_AS(compute_e(0.0, 0.0, ModelParams{2, 0.8, 1.0}),
                  DivergenceError);
  CHECK_THROWS_AS(compute_e(0.0, 0.0, ModelParams{3, 0.5, 1.0}),
                  DivergenceError);
  CHECK_NOTHROW(compute_e(0.0, 0.0, ModelParams{2, 0.5, 1.0}));
}

TEST_CASE("zero-width value matches the probe's stable level") {
  const ModelParams p{2, 0.5, 1.0};
  QuadConfig cfg;
  cfg.rel_tol = 1e-6;
  cfg.max_cells = 400'000;
  const double e00 = compute_e(0.0, 0.0, p, cfg).value;
  const ProbeReport probe = divergence_probe(p, 7);
  CHECK(probe.stabilized);
  CHECK(e00 == doctest::Approx(probe.levels.back().value).epsilon(0.01));
}

TEST_CASE("rate curve equals the three-term combination") {
  const ModelParams p{2, 0.45, 1.0};
  QuadConfig cfg;
  cfg.rel_tol = 2e-5;
  cfg.max_cells = 400'000;
  const double eps = 0.25;
  const RateReport rr = rate_curve(p, {eps, eps / 2}, cfg);
  const QuadResult ee = compute_e(eps, eps, p, cfg);
  const QuadResult e0 = compute_e(eps, 0.0, p, cfg);
  const QuadResult zz = compute_e(0.0, 0.0, p, cfg);
  const double composed = ee.value - 2.0 * e0.value + zz.value;
  const double budget = rr.points[0].abs_error + ee.abs_error_estimate +
                        2.0 * e0.abs_error_estimate + zz.abs_error_estimate;
  CHECK(std::abs(rr.points[0].delta - composed) <= budget);
  CHECK(rr.points[0].delta > 0.0);
  CHECK(rr.points[1].delta < rr.points[0].delta);
}

TEST_CASE("rate curve validates its regime and ladder") {
  CHECK_THROWS_AS(rate_curve({2, 0.75, 1.0}, {0.5, 0.25}), RegimeError);
  CHECK_THROWS_AS(rate_curve({2, 0.4, 1.0}, {0.25, 0.5}), std::domain_error);
  CHECK_THROWS_AS(rate_curve({2, 0.4, 1.0}, {0.25}), std::domain_error);
  // the boundary case is admitted
  QuadConfig cfg;
  cfg.rel_tol = 1e-3;
  cfg.max_cells = 50'000;
  CHECK_NOTHROW(rate_curve({2, 0.5, 1.0}, {0.5, 0.25}, cfg));
}

TEST_CASE("divergence probe signatures on both sides of the frontier") {
  const ProbeReport grow = divergence_probe({3, 0.6, 1.0}, 6);
  for (size_t i = grow.ratios.size() - 3; i < grow.ratios.size(); ++i)
    CHECK(grow.ratios[i] > 1.3);
  CHECK_FALSE(grow.stabilized);

  const ProbeReport stab = divergence_probe({2, 0.4, 1.0}, 6);
  CHECK(stab.stabilized);

  // boundary case grows without a geometric envelope: differences increase
  // slowly and successive ratios head toward one
  const ProbeReport edge = divergence_probe({2, 0.75, 1.0}, 7);
  std::vector<double> diffs;
  for (size_t i = 0; i + 1 < edge.levels.size(); ++i)
    diffs.push_back(edge.levels[i + 1].value - edge.levels[i].value);
  for (size_t i = 0; i + 1 < diffs.size(); ++i) {
    CHECK(diffs[i] > 0.0);
    CHECK(diffs[i + 1] / diffs[i] < 1.5);
  }
  CHECK(edge.ratios.back() < grow.ratios.back());
}

TEST_CASE("mean divergence curve slope and scaling in the horizon") {
  std::vector<double> ladder;
  for (int k = 8; k <= 12; ++k) ladder.push_back(std::pow(10.0, -0.5 * k));
  const MeanCurveReport one = mean_divergence_curve({2, 0.5, 1.0}, ladder);
  const double coeff = 1.0 / 6.283185307179586;
  CHECK(one.slope == doctest::Approx(coeff).epsilon(0.02));
  const MeanCurveReport two = mean_divergence_curve({2, 0.5, 2.0}, ladder);
  CHECK(two.slope == doctest::Approx(2.0 * one.slope).epsilon(0.01));
  CHECK_THROWS_AS(mean_divergence_curve({2, 0.6, 1.0}, ladder), RegimeError);
}

TEST_CASE("slope fitting is exact on a line") {
  std::vector<double> x{1, 2, 3, 4}, y;
  for (double v : x) y.push_back(3.5 * v - 2.0);
  CHECK(fit_slope(x, y) == doctest::Approx(3.5).epsilon(1e-14));
  CHECK_THROWS_AS(fit_slope({1.0}, {2.0}), std::invalid_argument);
}

TEST_CASE("config validation") {
  QuadConfig bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = {};
  bad.softening_exponent = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = {};
  bad.max_cells = 0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
