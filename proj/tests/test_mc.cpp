#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "fbmlab/kernels.hpp"
#include "fbmlab/local_time.hpp"
#include "fbmlab/mc.hpp"
#include "fbmlab/quadrature.hpp"

using namespace fbmlab;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.params = {2, 0.4, 1.0};
  s.eps = 0.1;
  s.grid_n = 64;
  s.n_paths = 500;
  s.seed = 5;
  return s;
}

} // namespace

TEST_CASE("reports are bit-identical across worker counts") {
  ExperimentSpec s = small_spec();
  s.g_list = {0.0, 1.0};
  s.center_mode = CenterMode::quadrature_mean;
  std::string first;
  for (int t : {1, 4, 8}) {
    s.threads = t;
    const std::string dump = run_experiment(s).to_json().dump();
    if (first.empty())
      first = dump;
    else
      CHECK(dump == first);
  }
}

TEST_CASE("zero coupling gives weight one with zero spread") {
  ExperimentSpec s = small_spec();
  s.g_list = {0.0};
  const ExperimentReport rep = run_experiment(s);
  const auto curve = edwards_curve(rep, false);
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].second.mean == 1.0);
  CHECK(curve[0].second.std_error == 0.0);
  CHECK(curve[0].second.saturated_fraction == 0.0);
}

TEST_CASE("centered samples respect the hard floor") {
  ExperimentSpec s = small_spec();
  s.center_mode = CenterMode::quadrature_mean;
  const ExperimentReport rep = run_experiment(s);
  CHECK(rep.floor_violations == 0);
  CHECK(rep.min_centered >= -rep.mean_reference - 1e-12);
  CHECK(rep.mean_reference ==
        doctest::Approx(mean_local_time(s.params, s.eps)).epsilon(1e-12));
}

TEST_CASE("full mean equals the mean of batch means") {
  ExperimentSpec s = small_spec();
  s.n_paths = 1000;
  s.n_batches = 50; // equal batches of 20
  const ExperimentReport rep = run_experiment(s);
  const McEstimate* mean = rep.find("mean_local_time");
  REQUIRE(mean);
  CHECK(mean->n_batches == 50);
  CHECK(mean->std_error > 0.0);

  // independent recomputation from regenerated paths: per-batch means first,
  // then their average
  const TimeGrid grid = TimeGrid::uniform(s.grid_n, s.params.horizon);
  std::vector<double> L(size_t(s.n_paths), 0.0);
  for (long i = 0; i < s.n_paths; ++i)
    L[size_t(i)] =
        local_time(generate_path(s.params, grid, s.seed, uint64_t(i)), s.eps)
            .value;
  double mean_of_batch_means = 0.0;
  for (int b = 0; b < 50; ++b) {
    double bm = 0.0;
    for (long i = s.n_paths * b / 50; i < s.n_paths * (b + 1) / 50; ++i)
      bm += L[size_t(i)];
    mean_of_batch_means += bm / double(s.n_paths / 50);
  }
  mean_of_batch_means /= 50.0;
  CHECK(mean->mean ==
        doctest::Approx(mean_of_batch_means).epsilon(1e-12));
}

TEST_CASE("Jensen gap has the right sign") {
  ExperimentSpec s = small_spec();
  s.n_paths = 2000;
  s.g_list = {1.0, 5.0};
  const ExperimentReport rep = run_experiment(s);
  const double mean = rep.find("mean_local_time")->mean;
  for (const auto& [g, est] : edwards_curve(rep, false))
    CHECK(est.mean >= std::exp(-g * mean) - 3.0 * est.std_error);
}

TEST_CASE("uncentered curve decreases in the coupling") {
  ExperimentSpec s = small_spec();
  s.n_paths = 1500;
  s.g_list = {0.0, 1.0, 5.0, 25.0};
  const auto curve = edwards_curve(run_experiment(s), false);
  REQUIRE(curve.size() == 4);
  for (size_t i = 1; i < curve.size(); ++i)
    CHECK(curve[i].second.mean < curve[i - 1].second.mean);
}

TEST_CASE("centered runs also report the uncentered curve when dH < 1") {
  ExperimentSpec s = small_spec();
  s.g_list = {1.0};
  s.center_mode = CenterMode::quadrature_mean;
  const ExperimentReport rep = run_experiment(s);
  const auto centered = edwards_curve(rep, true);
  const auto uncentered = edwards_curve(rep, false);
  REQUIRE(centered.size() == 1);
  REQUIRE(uncentered.size() == 1);
  // exp(-g L) = exp(-g mean) exp(-g centered) pathwise
  CHECK(uncentered[0].second.mean ==
        doctest::Approx(centered[0].second.mean *
                        std::exp(-1.0 * rep.mean_reference))
            .epsilon(1e-12));
}

TEST_CASE("mean and variance match the deterministic values") {
  ExperimentSpec s;
  s.params = {2, 0.4, 1.0};
  s.eps = 0.1;
  s.grid_n = 512;
  s.n_paths = 2000;
  s.seed = 12;
  const ExperimentReport rep = run_experiment(s);
  const McEstimate* mean = rep.find("mean_local_time");
  const McEstimate* var = rep.find("var_local_time");
  REQUIRE(mean);
  REQUIRE(var);
  const double qmean = mean_local_time(s.params, s.eps);
  const double qvar = compute_e(s.eps, s.eps, s.params).value;
  CHECK(std::abs(mean->mean - qmean) <= 3.0 * mean->std_error);
  CHECK(std::abs(var->mean - qvar) <= 3.0 * var->std_error);
}

TEST_CASE("tail probe floors and seed stability") {
  ExperimentSpec s = small_spec();
  s.center_mode = CenterMode::quadrature_mean;
  s.n_paths = 1000;
  const double mean_ref = mean_local_time(s.params, s.eps);
  const TailReport rep = tail_probe(s, {mean_ref * 0.25, mean_ref * 0.5,
                                        mean_ref * 1.01, mean_ref * 3.0});
  REQUIRE(rep.points.size() == 4);
  // nothing can fall below the centering constant
  CHECK(rep.points[2].count == 0);
  CHECK(rep.points[3].count == 0);
  CHECK(rep.points[0].count >= rep.points[1].count);

  ExperimentSpec s2 = s;
  s2.seed = 6;
  const TailReport rep2 = tail_probe(s2, {mean_ref * 0.25});
  const double p1 = rep.points[0].probability;
  const double p2 = rep2.points[0].probability;
  const double se = std::sqrt(p1 * (1 - p1) / double(s.n_paths)) +
                    std::sqrt(p2 * (1 - p2) / double(s.n_paths));
  CHECK(std::abs(p1 - p2) <= 3.0 * se + 1e-12);

  ExperimentSpec bad = s;
  bad.center_mode = CenterMode::none;
  CHECK_THROWS_AS(tail_probe(bad, {1.0}), std::domain_error);
}

TEST_CASE("lower-tail log frequencies fall off in the threshold") {
  ExperimentSpec s;
  s.params = {2, 0.5, 1.0};
  s.eps = 0.05;
  s.grid_n = 256;
  s.n_paths = 4000;
  s.seed = 21;
  s.center_mode = CenterMode::quadrature_mean;
  const TailReport rep = tail_probe(s, {0.05, 0.10, 0.15, 0.20});
  std::vector<double> N, logp;
  for (const auto& pt : rep.points) {
    if (pt.count < 10) continue;
    N.push_back(pt.threshold);
    logp.push_back(std::log(pt.probability));
  }
  REQUIRE(N.size() >= 3);
  for (size_t i = 1; i < logp.size(); ++i) CHECK(logp[i] < logp[i - 1]);
  CHECK(fit_slope(N, logp) < 0.0);
}

TEST_CASE("spec JSON round trip") {
  ExperimentSpec s = small_spec();
  s.g_list = {0.0, 2.5};
  s.center_mode = CenterMode::quadrature_mean;
  const ExperimentSpec back = ExperimentSpec::from_json(s.to_json());
  CHECK(back.to_json() == s.to_json());
  CHECK_THROWS_AS(
      ExperimentSpec::from_json({{"center_mode", "sample_mean"}}),
      std::domain_error);
}

TEST_CASE("spec validation") {
  ExperimentSpec s = small_spec();
  s.eps = 0.0;
  CHECK_THROWS_AS(s.validate(), std::domain_error);
  s = small_spec();
  s.g_list = {-1.0};
  CHECK_THROWS_AS(s.validate(), std::domain_error);
  s = small_spec();
  s.grid_n = 1;
  CHECK_THROWS_AS(s.validate(), std::domain_error);
}
