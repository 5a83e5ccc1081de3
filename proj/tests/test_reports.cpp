#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "fbmlab/acceptance.hpp"
#include "fbmlab/kernels.hpp"
#include "fbmlab/quadrature.hpp"
#include "support/schema_check.hpp"

using fbmlab::testing::validate_schema;
using nlohmann::json;

namespace {
json load_schema(const std::string& name) {
  std::ifstream f(std::string(FBMLAB_SCHEMA_DIR) + "/" + name);
  REQUIRE(f.good());
  return json::parse(f);
}
} // namespace

TEST_CASE("acceptance report JSON matches its schema") {
  fbmlab::AcceptanceReport rep;
  rep.suite = "fast";
  rep.criteria.push_back({1, "mu-identity", true, "max relative deviation 1e-16", 12.5});
  rep.criteria.push_back({4, "mean-power-ratio", false, "ratio 0.9446", 0.4});
  rep.all_passed = false;
  CHECK(validate_schema(rep.to_json(), load_schema("acceptance_report.schema.json")) == "");
}

TEST_CASE("core report JSON matches the shipped schemas") {
  const fbmlab::ModelParams p{2, 0.45, 1.0};
  fbmlab::QuadConfig cfg;
  cfg.rel_tol = 1e-3;
  cfg.max_cells = 20'000;

  const fbmlab::QuadResult qr = fbmlab::compute_e(0.1, 0.05, p, cfg);
  CHECK(validate_schema(
            fbmlab::quad_result_json("e-value", p, 0.1, 0.05, qr, cfg),
            load_schema("quad_result.schema.json")) == "");

  const fbmlab::RateReport rr = fbmlab::rate_curve(p, {0.25, 0.125}, cfg);
  CHECK(validate_schema(rr.to_json(), load_schema("rate_report.schema.json")) ==
        "");

  const fbmlab::ProbeReport pr = fbmlab::divergence_probe(p, 3, cfg);
  CHECK(validate_schema(pr.to_json(),
                        load_schema("probe_report.schema.json")) == "");

  const fbmlab::MeanCurveReport mc =
      fbmlab::mean_divergence_curve({2, 0.5, 1.0}, {1e-4, 1e-5});
  CHECK(validate_schema(mc.to_json(),
                        load_schema("mean_curve.schema.json")) == "");

  const fbmlab::BoundCheckReport bc = fbmlab::shifted_power_sweep();
  // element shape of the verify-bounds "checks" array
  const json arr_schema = load_schema("bound_checks.schema.json");
  CHECK(validate_schema(bc.to_json(), arr_schema["properties"]["checks"]["items"]) == "");
}
