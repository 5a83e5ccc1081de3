#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "fbmlab/fbmlab.h"

using nlohmann::json;

namespace {
std::string take(char* s) {
  std::string out = s ? s : "";
  fbmlab_string_free(s);
  return out;
}
} // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(fbmlab_version()) == "1.0.0");
  CHECK(std::string(fbmlab_status_name(FBMLAB_OK)) == "ok");
  CHECK(std::string(fbmlab_status_name(FBMLAB_ERR_REGIME)) == "regime error");
}

TEST_CASE("scalar kernels and error reporting") {
  double v = 0.0;
  REQUIRE(fbmlab_fbm_covariance(2, 3, 0.5, &v) == FBMLAB_OK);
  CHECK(v == doctest::Approx(2.0));

  CHECK(fbmlab_fbm_covariance(2, 3, 1.5, &v) == FBMLAB_ERR_DOMAIN);
  CHECK(std::strlen(fbmlab_last_error()) > 0);
  CHECK(fbmlab_fbm_covariance(2, 3, 0.5, nullptr) == FBMLAB_ERR_NULL);

  REQUIRE(fbmlab_increment_covariance(0, 2, 1, 3, 0.5, &v) == FBMLAB_OK);
  CHECK(v == doctest::Approx(1.0));

  const double x[2] = {1.0, 1.0};
  REQUIRE(fbmlab_heat_kernel(x, 2, 1.0, &v) == FBMLAB_OK);
  CHECK(v == doctest::Approx(std::exp(-1.0) / 6.283185307179586));

  REQUIRE(fbmlab_mean_local_time(2, 0.5, 1.0, 0.1, &v) == FBMLAB_OK);
  CHECK(v == doctest::Approx((1.1 * std::log(11.0) - 1.0) / 6.283185307179586)
                 .epsilon(1e-9));

  CHECK(fbmlab_mean_asymptotic(2, 0.45, 1.0, 0.1, &v) == FBMLAB_ERR_REGIME);
  REQUIRE(fbmlab_mean_asymptotic(2, 0.5, 1.0, 0.1, &v) == FBMLAB_OK);

  int saturated = -1;
  REQUIRE(fbmlab_edwards_weight(2.0, 1.0, &v, &saturated) == FBMLAB_OK);
  CHECK(v == doctest::Approx(std::exp(-2.0)));
  CHECK(saturated == 0);
  REQUIRE(fbmlab_edwards_weight(-1e9, 1.0, &v, &saturated) == FBMLAB_OK);
  CHECK(saturated == 1);
}

TEST_CASE("path lifecycle through the handle API") {
  fbmlab_path* path = nullptr;
  REQUIRE(fbmlab_path_generate(2, 0.4, 1.0, 32, 7, 0, FBMLAB_GEN_FAST, &path) ==
          FBMLAB_OK);
  REQUIRE(path);
  int n = 0, d = 0;
  REQUIRE(fbmlab_path_size(path, &n, &d) == FBMLAB_OK);
  CHECK(n == 32);
  CHECK(d == 2);
  const double* vals = fbmlab_path_values(path);
  REQUIRE(vals);
  CHECK(vals[0] == 0.0);
  CHECK(vals[1] == 0.0);

  double L = -1.0;
  REQUIRE(fbmlab_local_time(path, 0.1, &L) == FBMLAB_OK);
  CHECK(L >= 0.0);
  CHECK(fbmlab_local_time(path, 0.0, &L) == FBMLAB_ERR_DOMAIN);

  const char* csv = "/tmp/fbmlab_capi_path.csv";
  const char* bin = "/tmp/fbmlab_capi_path.bin";
  REQUIRE(fbmlab_path_write_csv(path, csv) == FBMLAB_OK);
  REQUIRE(fbmlab_path_write_binary(path, bin) == FBMLAB_OK);
  std::ifstream b(bin, std::ios::binary);
  char magic[4];
  b.read(magic, 4);
  CHECK(std::memcmp(magic, "FBMP", 4) == 0);
  fbmlab_path_free(path);

  CHECK(fbmlab_path_generate(2, 0.4, 1.0, 32, 7, 0, 42, &path) ==
        FBMLAB_ERR_DOMAIN);
  CHECK(fbmlab_path_generate(2, 1.4, 1.0, 32, 7, 0, FBMLAB_GEN_FAST, &path) ==
        FBMLAB_ERR_DOMAIN);
}

TEST_CASE("deterministic generation through the C API") {
  fbmlab_path *a = nullptr, *b = nullptr;
  REQUIRE(fbmlab_path_generate(1, 0.7, 2.0, 64, 99, 5, FBMLAB_GEN_FAST, &a) ==
          FBMLAB_OK);
  REQUIRE(fbmlab_path_generate(1, 0.7, 2.0, 64, 99, 5, FBMLAB_GEN_FAST, &b) ==
          FBMLAB_OK);
  CHECK(std::memcmp(fbmlab_path_values(a), fbmlab_path_values(b),
                    65 * sizeof(double)) == 0);
  fbmlab_path_free(a);
  fbmlab_path_free(b);
}

TEST_CASE("quadrature through the C API") {
  fbmlab_quad_config cfg;
  REQUIRE(fbmlab_quad_config_default(&cfg) == FBMLAB_OK);
  CHECK(cfg.rel_tol == doctest::Approx(1e-6));
  CHECK(cfg.softening_exponent == doctest::Approx(3.0));

  fbmlab_quad_result r;
  REQUIRE(fbmlab_compute_e(2, 0.5, 1.0, 0.1, 0.1, nullptr, &r) == FBMLAB_OK);
  CHECK(r.value > 0.0);
  CHECK(r.converged == 1);
  CHECK(r.value == doctest::Approx(r.region_t1 + r.region_t2 + r.region_t3)
                       .epsilon(1e-12));

  CHECK(fbmlab_compute_e(3, 0.6, 1.0, 0.0, 0.0, nullptr, &r) ==
        FBMLAB_ERR_DIVERGENT);
  CHECK(std::string(fbmlab_last_error()).find("diverges") != std::string::npos);

  fbmlab_quad_result m2;
  REQUIRE(fbmlab_second_moment(2, 0.5, 1.0, 0.1, &cfg, &m2) == FBMLAB_OK);
  CHECK(m2.value > r.value);
}

TEST_CASE("report drivers emit parseable JSON") {
  char* out = nullptr;
  const double ladder[3] = {0.25, 0.125, 0.0625};
  fbmlab_quad_config cfg;
  fbmlab_quad_config_default(&cfg);
  cfg.rel_tol = 1e-3;
  cfg.max_cells = 20'000;
  REQUIRE(fbmlab_rate_curve_json(2, 0.45, 1.0, ladder, 3, &cfg, &out) ==
          FBMLAB_OK);
  json rate = json::parse(take(out));
  CHECK(rate["points"].size() == 3);
  CHECK(rate.contains("slope"));

  CHECK(fbmlab_rate_curve_json(2, 0.75, 1.0, ladder, 3, &cfg, &out) ==
        FBMLAB_ERR_REGIME);

  REQUIRE(fbmlab_divergence_probe_json(2, 0.4, 1.0, 4, nullptr, &out) ==
          FBMLAB_OK);
  json probe = json::parse(take(out));
  CHECK(probe["levels"].size() == 4);

  const double meps[3] = {1e-4, 1e-5, 1e-6};
  REQUIRE(fbmlab_mean_divergence_json(2, 0.5, 1.0, meps, 3, &out) == FBMLAB_OK);
  json md = json::parse(take(out));
  CHECK(md["points"].size() == 3);
  CHECK(fbmlab_mean_divergence_json(2, 0.6, 1.0, meps, 3, &out) ==
        FBMLAB_ERR_REGIME);
}

TEST_CASE("experiments through the C API are thread-count invariant") {
  json spec = {{"d", 2},        {"H", 0.4},     {"eps", 0.1},
               {"grid_n", 64},  {"n_paths", 400}, {"g_list", {0.0, 1.0}},
               {"center_mode", "quadrature_mean"}, {"seed", 3}};
  spec["threads"] = 1;
  char* out = nullptr;
  REQUIRE(fbmlab_run_experiment_json(spec.dump().c_str(), &out) == FBMLAB_OK);
  const std::string one = take(out);
  spec["threads"] = 8;
  REQUIRE(fbmlab_run_experiment_json(spec.dump().c_str(), &out) == FBMLAB_OK);
  const std::string eight = take(out);
  CHECK(one == eight);
  CHECK(json::parse(one)["statistics"].size() >= 2);

  CHECK(fbmlab_run_experiment_json("{not json", &out) == FBMLAB_ERR_DOMAIN);

  const double thresholds[2] = {0.1, 10.0};
  REQUIRE(fbmlab_tail_probe_json(spec.dump().c_str(), thresholds, 2, &out) ==
          FBMLAB_OK);
  json tails = json::parse(take(out));
  CHECK(tails["points"].size() == 2);
  CHECK(tails["points"][1]["count"] == 0);
}

TEST_CASE("bound verification driver") {
  char* out = nullptr;
  REQUIRE(fbmlab_verify_bounds_json(2, 0.45, 1.0, 400, 42, &out) == FBMLAB_OK);
  json j = json::parse(take(out));
  CHECK(j["checks"].size() == 10);
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("check"));
    if (c.contains("sup_ratio")) CHECK(c["sup_ratio"].get<double>() >= 0.0);
  }
  CHECK(fbmlab_verify_bounds_json(2, 0.45, 1.0, 0, 42, &out) ==
        FBMLAB_ERR_DOMAIN);
}
