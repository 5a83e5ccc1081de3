#include "fbmlab/fbmlab.h"

#include <cstring>
#include <new>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "fbmlab/acceptance.hpp"
#include "fbmlab/fbm.hpp"
#include "fbmlab/kernels.hpp"
#include "fbmlab/local_time.hpp"
#include "fbmlab/mc.hpp"
#include "fbmlab/quadrature.hpp"

using nlohmann::json;

struct fbmlab_path {
  fbmlab::Path impl;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const char* what) {
  g_last_error = what ? what : "";
  return code;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const fbmlab::RegimeError& e) {
    return fail(FBMLAB_ERR_REGIME, e.what());
  } catch (const fbmlab::DivergenceError& e) {
    return fail(FBMLAB_ERR_DIVERGENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(FBMLAB_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(FBMLAB_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FBMLAB_ERR_NUMERIC, "out of memory");
  } catch (const std::exception& e) {
    return fail(FBMLAB_ERR_NUMERIC, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fbmlab::QuadConfig to_config(const fbmlab_quad_config* cfg) {
  fbmlab::QuadConfig c;
  if (cfg) {
    c.rel_tol = cfg->rel_tol;
    c.max_cells = cfg->max_cells;
    c.softening_exponent = cfg->softening_exponent;
    c.boundary_margin = cfg->boundary_margin;
  }
  return c;
}

void to_result(const fbmlab::QuadResult& r, fbmlab_quad_result* out) {
  out->value = r.value;
  out->abs_error = r.abs_error_estimate;
  out->cells = r.cells;
  out->converged = r.converged ? 1 : 0;
  out->region_t1 = r.region_breakdown[0];
  out->region_t2 = r.region_breakdown[1];
  out->region_t3 = r.region_breakdown[2];
}

std::vector<double> to_ladder(const double* eps, int n) {
  if (!eps || n < 1) throw std::domain_error("ladder must be non-empty");
  return std::vector<double>(eps, eps + n);
}

} // namespace

extern "C" {

const char* fbmlab_version(void) { return "1.0.0"; }

const char* fbmlab_status_name(int status) {
  switch (status) {
    case FBMLAB_OK: return "ok";
    case FBMLAB_ERR_DOMAIN: return "domain error";
    case FBMLAB_ERR_REGIME: return "regime error";
    case FBMLAB_ERR_DIVERGENT: return "divergent";
    case FBMLAB_ERR_NUMERIC: return "numerical failure";
    case FBMLAB_ERR_IO: return "io error";
    case FBMLAB_ERR_NULL: return "null argument";
    default: return "unknown status";
  }
}

const char* fbmlab_last_error(void) { return g_last_error.c_str(); }

void fbmlab_string_free(char* s) { delete[] s; }

int fbmlab_fbm_covariance(double s, double t, double hurst, double* out) {
  if (!out) return fail(FBMLAB_ERR_NULL, "out is null");
  return guarded([&]() -> int {
    *out = fbmlab::fbm_covariance(s, t, hurst);
    return FBMLAB_OK;
  });
}

int fbmlab_increment_covariance(double s, double t, double s2, double t2,
                                double hurst, double* out) {
  if (!out) return fail(FBMLAB_ERR_NULL, "out is null");
  return guarded([&]() -> int {
    *out = fbmlab::increment_covariance(s, t, s2, t2, hurst);
    return FBMLAB_OK;
  });
}

int fbmlab_heat_kernel(const double* x, int d, double eps, double* out) {
  if (!x || !out) return fail(FBMLAB_ERR_NULL, "x or out is null");
  if (d < 1) return fail(FBMLAB_ERR_DOMAIN, "d must be >= 1");
  return guarded([&]() -> int {
    *out = fbmlab::heat_kernel(std::span<const double>(x, size_t(d)), eps);
    return FBMLAB_OK;
  });
}

int fbmlab_mean_local_time(int d, double hurst, double horizon, double eps,
                           double* out) {
  if (!out) return fail(FBMLAB_ERR_NULL, "out is null");
  return guarded([&]() -> int {
    *out = fbmlab::mean_local_time({d, hurst, horizon}, eps);
    return FBMLAB_OK;
  });
}

int fbmlab_mean_asymptotic(int d, double hurst, double horizon, double eps,
                           double* out) {
  if (!out) return fail(FBMLAB_ERR_NULL, "out is null");
  return guarded([&]() -> int {
    try {
      *out = fbmlab::mean_asymptotic({d, hurst, horizon}, eps);
    } catch (const std::domain_error& e) {
      // asymptotic regimes are regime errors, not argument errors
      if (std::string(e.what()).find("asymptotics") != std::string::npos)
        return fail(FBMLAB_ERR_REGIME, e.what());
      throw;
    }
    return FBMLAB_OK;
  });
}

int fbmlab_edwards_weight(double value, double g, double* weight,
                          int* saturated) {
  if (!weight) return fail(FBMLAB_ERR_NULL, "weight is null");
  return guarded([&]() -> int {
    fbmlab::LocalTimeEstimate est;
    est.value = value;
    est.centered = value;
    const fbmlab::EdwardsWeight w = fbmlab::edwards_weight(est, g, false);
    *weight = w.weight;
    if (saturated) *saturated = w.saturated ? 1 : 0;
    return FBMLAB_OK;
  });
}

int fbmlab_path_generate(int d, double hurst, double horizon, int n,
                         uint64_t seed, uint64_t path_index, int method,
                         fbmlab_path** out) {
  if (!out) return fail(FBMLAB_ERR_NULL, "out is null");
  if (method != FBMLAB_GEN_DENSE && method != FBMLAB_GEN_FAST)
    return fail(FBMLAB_ERR_DOMAIN, "method must be dense (0) or fast (1)");
  return guarded([&]() -> int {
    auto* handle = new fbmlab_path{fbmlab::generate_path(
        {d, hurst, horizon}, fbmlab::TimeGrid::uniform(n, horizon), seed,
        path_index,
        method == FBMLAB_GEN_DENSE ? fbmlab::GenMethod::dense
                                   : fbmlab::GenMethod::fast)};
    *out = handle;
    return FBMLAB_OK;
  });
}

void fbmlab_path_free(fbmlab_path* path) { delete path; }

int fbmlab_path_size(const fbmlab_path* path, int* n, int* d) {
  if (!path) return fail(FBMLAB_ERR_NULL, "path is null");
  if (n) *n = path->impl.grid.n;
  if (d) *d = path->impl.d;
  return FBMLAB_OK;
}

const double* fbmlab_path_values(const fbmlab_path* path) {
  return path ? path->impl.values.data() : nullptr;
}

int fbmlab_path_write_csv(const fbmlab_path* path, const char* file) {
  if (!path || !file) return fail(FBMLAB_ERR_NULL, "path or file is null");
  return guarded([&]() -> int {
    try {
      path->impl.write_csv(file);
    } catch (const std::runtime_error& e) {
      return fail(FBMLAB_ERR_IO, e.what());
    }
    return FBMLAB_OK;
  });
}

int fbmlab_path_write_binary(const fbmlab_path* path, const char* file) {
  if (!path || !file) return fail(FBMLAB_ERR_NULL, "path or file is null");
  return guarded([&]() -> int {
    try {
      path->impl.write_binary(file);
    } catch (const std::runtime_error& e) {
      return fail(FBMLAB_ERR_IO, e.what());
    }
    return FBMLAB_OK;
  });
}

int fbmlab_local_time(const fbmlab_path* path, double eps, double* value) {
  if (!path || !value) return fail(FBMLAB_ERR_NULL, "path or value is null");
  return guarded([&]() -> int {
    *value = fbmlab::local_time(path->impl, eps).value;
    return FBMLAB_OK;
  });
}

int fbmlab_quad_config_default(fbmlab_quad_config* cfg) {
  if (!cfg) return fail(FBMLAB_ERR_NULL, "cfg is null");
  const fbmlab::QuadConfig d;
  cfg->rel_tol = d.rel_tol;
  cfg->max_cells = d.max_cells;
  cfg->softening_exponent = d.softening_exponent;
  cfg->boundary_margin = d.boundary_margin;
  return FBMLAB_OK;
}

int fbmlab_compute_e(int d, double hurst, double horizon, double eps,
                     double gamma, const fbmlab_quad_config* cfg,
                     fbmlab_quad_result* out) {
  if (!out) return fail(FBMLAB_ERR_NULL, "out is null");
  return guarded([&]() -> int {
    to_result(fbmlab::compute_e(eps, gamma, {d, hurst, horizon}, to_config(cfg)),
              out);
    return FBMLAB_OK;
  });
}

int fbmlab_second_moment(int d, double hurst, double horizon, double eps,
                         const fbmlab_quad_config* cfg,
                         fbmlab_quad_result* out) {
  if (!out) return fail(FBMLAB_ERR_NULL, "out is null");
  return guarded([&]() -> int {
    to_result(fbmlab::compute_second_moment(eps, {d, hurst, horizon},
                                            to_config(cfg)),
              out);
    return FBMLAB_OK;
  });
}

int fbmlab_rate_curve_json(int d, double hurst, double horizon,
                           const double* eps_ladder, int n_ladder,
                           const fbmlab_quad_config* cfg, char** json_out) {
  if (!json_out) return fail(FBMLAB_ERR_NULL, "json_out is null");
  return guarded([&]() -> int {
    const auto rep = fbmlab::rate_curve(
        {d, hurst, horizon}, to_ladder(eps_ladder, n_ladder), to_config(cfg));
    *json_out = dup_string(rep.to_json().dump());
    return FBMLAB_OK;
  });
}

int fbmlab_divergence_probe_json(int d, double hurst, double horizon,
                                 int max_level, const fbmlab_quad_config* cfg,
                                 char** json_out) {
  if (!json_out) return fail(FBMLAB_ERR_NULL, "json_out is null");
  return guarded([&]() -> int {
    const auto rep =
        fbmlab::divergence_probe({d, hurst, horizon}, max_level, to_config(cfg));
    *json_out = dup_string(rep.to_json().dump());
    return FBMLAB_OK;
  });
}

int fbmlab_mean_divergence_json(int d, double hurst, double horizon,
                                const double* eps_ladder, int n_ladder,
                                char** json_out) {
  if (!json_out) return fail(FBMLAB_ERR_NULL, "json_out is null");
  return guarded([&]() -> int {
    const auto rep = fbmlab::mean_divergence_curve(
        {d, hurst, horizon}, to_ladder(eps_ladder, n_ladder));
    *json_out = dup_string(rep.to_json().dump());
    return FBMLAB_OK;
  });
}

int fbmlab_run_experiment_json(const char* spec_json, char** json_out) {
  if (!spec_json || !json_out)
    return fail(FBMLAB_ERR_NULL, "spec_json or json_out is null");
  return guarded([&]() -> int {
    json j;
    try {
      j = json::parse(spec_json);
    } catch (const json::parse_error& e) {
      return fail(FBMLAB_ERR_DOMAIN, e.what());
    }
    const auto spec = fbmlab::ExperimentSpec::from_json(j);
    *json_out = dup_string(fbmlab::run_experiment(spec).to_json().dump());
    return FBMLAB_OK;
  });
}

int fbmlab_tail_probe_json(const char* spec_json, const double* thresholds,
                           int n, char** json_out) {
  if (!spec_json || !json_out)
    return fail(FBMLAB_ERR_NULL, "spec_json or json_out is null");
  return guarded([&]() -> int {
    json j;
    try {
      j = json::parse(spec_json);
    } catch (const json::parse_error& e) {
      return fail(FBMLAB_ERR_DOMAIN, e.what());
    }
    const auto spec = fbmlab::ExperimentSpec::from_json(j);
    const auto rep = fbmlab::tail_probe(spec, to_ladder(thresholds, n));
    *json_out = dup_string(rep.to_json().dump());
    return FBMLAB_OK;
  });
}

int fbmlab_verify_bounds_json(int d, double hurst, double horizon,
                              long samples, uint64_t seed, char** json_out) {
  if (!json_out) return fail(FBMLAB_ERR_NULL, "json_out is null");
  return guarded([&]() -> int {
    const fbmlab::ModelParams p{d, hurst, horizon};
    p.validate();
    if (samples < 1) throw std::domain_error("samples must be >= 1");
    json checks = json::array();
    checks.push_back(fbmlab::shifted_power_sweep().to_json());
    for (fbmlab::Region reg : {fbmlab::Region::T2, fbmlab::Region::T3})
      for (bool mu_weighted : {false, true}) {
        checks.push_back(
            fbmlab::xi_bound_check(p, reg, mu_weighted, samples, seed).to_json());
        checks.push_back(
            fbmlab::capital_xi_bound_check(p, reg, mu_weighted, samples, seed)
                .to_json());
      }
    checks.push_back(fbmlab::delta_positivity_sweep(p, samples, seed).to_json());
    json out = {{"operation", "verify-bounds"},
                {"params", {{"d", p.d}, {"H", p.hurst}, {"T", p.horizon}}},
                {"samples", samples},
                {"seed", seed},
                {"checks", checks}};
    *json_out = dup_string(out.dump());
    return FBMLAB_OK;
  });
}

int fbmlab_acceptance_json(const char* suite, int threads, char** json_out,
                           int* all_passed) {
  if (!suite || !json_out)
    return fail(FBMLAB_ERR_NULL, "suite or json_out is null");
  return guarded([&]() -> int {
    const auto rep = fbmlab::run_acceptance(suite, threads);
    *json_out = dup_string(rep.to_json().dump(2));
    if (all_passed) *all_passed = rep.all_passed ? 1 : 0;
    return FBMLAB_OK;
  });
}

} // extern "C"
