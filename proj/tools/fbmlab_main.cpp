// fbmlab command-line front end. Talks to the core exclusively through the
// C API in fbmlab/fbmlab.h.

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fbmlab/fbmlab.h"

using nlohmann::json;

namespace {

int exit_code_for(int status) {
  switch (status) {
    case FBMLAB_OK: return 0;
    case FBMLAB_ERR_DOMAIN:
    case FBMLAB_ERR_REGIME:
    case FBMLAB_ERR_NULL: return 2;
    default: return 1;
  }
}

[[noreturn]] void die(int status) {
  std::cerr << "fbmlab: " << fbmlab_status_name(status) << ": "
            << fbmlab_last_error() << "\n";
  std::exit(exit_code_for(status));
}

void check(int status) {
  if (status != FBMLAB_OK) die(status);
}

// Write-to-temp plus atomic rename; partial outputs never land on disk.
void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      std::cerr << "fbmlab: cannot open " << tmp << "\n";
      std::exit(1);
    }
    f << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    std::cerr << "fbmlab: cannot rename " << tmp << " to " << path << "\n";
    std::exit(1);
  }
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  fbmlab_string_free(s);
  return out;
}

struct Common {
  int d = 2;
  double hurst = 0.5;
  double T = 1.0;
  uint64_t seed = 1;
  int threads = 0;
  std::string output;
  std::string format = "json";
  std::string config; // consumed before parsing; registered for --help only
};

void add_common(CLI::App* cmd, Common& c, bool with_format = true) {
  cmd->add_option("--config", c.config, "flat key=value file; flags win");
  cmd->add_option("--d", c.d, "spatial dimension");
  cmd->add_option("--hurst", c.hurst, "Hurst exponent in (0,1)");
  cmd->add_option("--T", c.T, "time horizon");
  cmd->add_option("--seed", c.seed, "random seed (FBMLAB_SEED overrides)");
  cmd->add_option("--threads", c.threads, "worker count, 0 = all cores");
  cmd->add_option("--output,-o", c.output, "output file ('-' = stdout)");
  if (with_format)
    cmd->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
}

struct QuadFlags {
  double rel_tol = 0.0;
  long max_cells = 0;
  double softening = 0.0;
  double margin = -1.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--rel-tol", rel_tol, "quadrature relative tolerance");
    cmd->add_option("--max-cells", max_cells, "quadrature cell budget");
    cmd->add_option("--softening", softening, "corner softening exponent");
    cmd->add_option("--margin", margin, "boundary margin of the softened cube");
  }

  fbmlab_quad_config config() const {
    fbmlab_quad_config cfg;
    fbmlab_quad_config_default(&cfg);
    if (rel_tol > 0.0) cfg.rel_tol = rel_tol;
    if (max_cells > 0) cfg.max_cells = max_cells;
    if (softening > 0.0) cfg.softening_exponent = softening;
    if (margin >= 0.0) cfg.boundary_margin = margin;
    return cfg;
  }
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

void emit_json(const Common& c, json j, double elapsed_ms) {
  j["elapsed_ms"] = elapsed_ms;
  write_output(c.output, j.dump(2) + "\n");
}

std::string csv_line(std::initializer_list<double> vals) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (double v : vals) {
    if (!first) os << ",";
    os << v;
    first = false;
  }
  os << "\n";
  return os.str();
}

// Flat key=value config support: keys mirror the long flag names and are
// injected as extra tokens unless the same flag already appears on the
// command line, so explicit flags always win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string config_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        std::cerr << "fbmlab: --config needs a file path\n";
        std::exit(2);
      }
      config_path = args[i + 1];
      args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + long(i));
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream f(config_path);
  if (!f) {
    std::cerr << "fbmlab: cannot read config file " << config_path << "\n";
    std::exit(2);
  }

  const std::vector<std::string> user_args = args;
  auto flag_given = [&](const std::string& name) {
    const std::string full = "--" + name;
    for (const auto& a : user_args) {
      if (a == full || a.rfind(full + "=", 0) == 0) return true;
      if (name == "output" && (a == "-o" || a.rfind("-o=", 0) == 0)) return true;
    }
    return false;
  };

  std::string line;
  while (std::getline(f, line)) {
    const size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const size_t eq = line.find('=', start);
    if (eq == std::string::npos) {
      std::cerr << "fbmlab: bad config line (expected key=value): " << line
                << "\n";
      std::exit(2);
    }
    auto trim = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t");
      const size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(start, eq - start));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") continue;
    if (flag_given(key)) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

json experiment_spec_json(const Common& c, double eps, int grid_n,
                          long n_paths, const std::vector<double>& g_list,
                          bool centered) {
  return {{"d", c.d},
          {"H", c.hurst},
          {"T", c.T},
          {"eps", eps},
          {"grid_n", grid_n},
          {"n_paths", n_paths},
          {"g_list", g_list},
          {"center_mode", centered ? "quadrature_mean" : "none"},
          {"seed", c.seed},
          {"threads", c.threads}};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional Brownian motion self-intersection toolkit"};
  app.name("fbmlab");
  app.require_subcommand(1);
  app.set_version_flag("--version", fbmlab_version());

  // simulate -------------------------------------------------------------
  Common sim_c;
  int sim_n = 512, sim_paths = 1;
  std::string sim_method = "fast";
  bool sim_binary = false;
  auto* sim = app.add_subcommand("simulate", "sample paths to CSV or binary");
  add_common(sim, sim_c, false);
  sim->add_option("--n", sim_n, "grid steps");
  sim->add_option("--paths", sim_paths, "number of paths");
  sim->add_option("--method", sim_method)->check(CLI::IsMember({"fast", "dense"}));
  sim->add_flag("--binary", sim_binary, "write the binary dump format");

  // localtime ------------------------------------------------------------
  Common lt_c;
  int lt_n = 512;
  long lt_paths = 1;
  double lt_eps = 0.1;
  bool lt_center = false;
  std::vector<double> lt_g;
  auto* lt = app.add_subcommand("localtime",
                                "per-path local time estimates as CSV");
  add_common(lt, lt_c, false);
  lt->add_option("--n", lt_n, "grid steps");
  lt->add_option("--paths", lt_paths, "number of paths");
  lt->add_option("--eps", lt_eps, "kernel width");
  lt->add_flag("--center", lt_center, "center with the quadrature mean");
  lt->add_option("--g", lt_g, "Edwards couplings (repeatable)");

  // mean -----------------------------------------------------------------
  Common mean_c;
  double mean_eps = 0.1;
  bool mean_asy = false;
  auto* mean = app.add_subcommand("mean", "mean of the approximated local time");
  add_common(mean, mean_c);
  mean->add_option("--eps", mean_eps, "kernel width");
  mean->add_flag("--asymptotic", mean_asy, "also report the leading asymptotic");

  // var ------------------------------------------------------------------
  Common var_c;
  double var_eps = 0.1;
  QuadFlags var_q;
  auto* var = app.add_subcommand("var", "variance of the approximated local time");
  add_common(var, var_c);
  var->add_option("--eps", var_eps, "kernel width");
  var_q.add(var);

  // e-value ----------------------------------------------------------------
  Common ev_c;
  double ev_eps = 0.0, ev_gamma = 0.0;
  QuadFlags ev_q;
  auto* ev = app.add_subcommand("e-value", "covariance functional E(eps, gamma)");
  add_common(ev, ev_c);
  ev->add_option("--eps", ev_eps, "first kernel width");
  ev->add_option("--gamma", ev_gamma, "second kernel width");
  ev_q.add(ev);

  // rate -------------------------------------------------------------------
  Common rate_c;
  int rate_kmin = 2, rate_kmax = 10;
  QuadFlags rate_q;
  auto* rate = app.add_subcommand(
      "rate", "centered L2 distance along a dyadic eps ladder");
  add_common(rate, rate_c);
  rate->add_option("--kmin", rate_kmin, "ladder starts at 2^-kmin");
  rate->add_option("--kmax", rate_kmax, "ladder ends at 2^-kmax");
  rate_q.add(rate);

  // mean-divergence ---------------------------------------------------------
  Common md_c;
  std::vector<double> md_ladder;
  auto* md = app.add_subcommand("mean-divergence",
                                "mean along an eps ladder with the log fit");
  add_common(md, md_c);
  md->add_option("--eps", md_ladder, "ladder values (repeatable, decreasing)");

  // divergence-probe ---------------------------------------------------------
  Common dp_c;
  int dp_levels = 7;
  QuadFlags dp_q;
  auto* dp = app.add_subcommand("divergence-probe",
                                "nested refinements of the eps = 0 integrand");
  add_common(dp, dp_c);
  dp->add_option("--levels", dp_levels, "refinement levels");
  dp_q.add(dp);

  // edwards -------------------------------------------------------------------
  Common ed_c;
  double ed_eps = 0.1;
  int ed_n = 512;
  long ed_paths = 10'000;
  bool ed_center = false;
  std::vector<double> ed_g{0.0, 1.0, 5.0, 25.0};
  auto* ed = app.add_subcommand("edwards", "Monte Carlo Edwards-weight curve");
  add_common(ed, ed_c);
  ed->add_option("--eps", ed_eps, "kernel width");
  ed->add_option("--n", ed_n, "grid steps");
  ed->add_option("--paths", ed_paths, "number of paths");
  ed->add_flag("--center", ed_center, "center with the quadrature mean");
  ed->add_option("--g", ed_g, "couplings (repeatable)");

  // tails ----------------------------------------------------------------------
  Common tl_c;
  double tl_eps = 0.05;
  int tl_n = 512;
  long tl_paths = 10'000;
  std::vector<double> tl_N;
  auto* tl = app.add_subcommand("tails", "lower-tail frequencies of centered L");
  add_common(tl, tl_c);
  tl->add_option("--eps", tl_eps, "kernel width");
  tl->add_option("--n", tl_n, "grid steps");
  tl->add_option("--paths", tl_paths, "number of paths");
  tl->add_option("--N", tl_N, "thresholds (repeatable)")->required();

  // verify-bounds -----------------------------------------------------------------
  Common vb_c;
  long vb_samples = 10'000;
  auto* vb = app.add_subcommand("verify-bounds",
                                "integral inequality sweeps as JSON");
  add_common(vb, vb_c);
  vb->add_option("--samples", vb_samples, "samples per sweep");

  // accept --------------------------------------------------------------------------
  Common ac_c;
  std::string ac_suite = "fast";
  auto* ac = app.add_subcommand("accept", "run the verification suite");
  add_common(ac, ac_c);
  ac->add_option("suite", ac_suite, "fast or full");

  std::vector<std::string> args =
      expand_config(std::vector<std::string>(argv + 1, argv + argc));
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // environment seed wins over the flag
  if (const char* env = std::getenv("FBMLAB_SEED")) {
    char* end = nullptr;
    const uint64_t s = std::strtoull(env, &end, 10);
    if (end && *end == '\0')
      for (Common* c : {&sim_c, &lt_c, &mean_c, &var_c, &ev_c, &rate_c, &md_c,
                        &dp_c, &ed_c, &tl_c, &vb_c, &ac_c})
        c->seed = s;
  }

  const auto t0 = std::chrono::steady_clock::now();

  if (*sim) {
    const int method = sim_method == "dense" ? FBMLAB_GEN_DENSE : FBMLAB_GEN_FAST;
    for (int i = 0; i < sim_paths; ++i) {
      fbmlab_path* path = nullptr;
      check(fbmlab_path_generate(sim_c.d, sim_c.hurst, sim_c.T, sim_n,
                                 sim_c.seed, uint64_t(i), method, &path));
      std::string out = sim_c.output;
      if (sim_paths > 1 && !out.empty() && out != "-")
        out += "." + std::to_string(i);
      if (out.empty() || out == "-") {
        // stream CSV rows to stdout
        int n = 0, d = 0;
        fbmlab_path_size(path, &n, &d);
        const double* v = fbmlab_path_values(path);
        std::ostringstream os;
        os.precision(17);
        os << "t";
        for (int c = 0; c < d; ++c) os << ",x_" << c + 1;
        os << "\n";
        for (int k = 0; k <= n; ++k) {
          os << (double(k) * sim_c.T / n);
          for (int c = 0; c < d; ++c) os << "," << v[size_t(k) * d + c];
          os << "\n";
        }
        std::cout << os.str();
      } else {
        check(sim_binary ? fbmlab_path_write_binary(path, out.c_str())
                         : fbmlab_path_write_csv(path, out.c_str()));
      }
      fbmlab_path_free(path);
    }
    return 0;
  }

  if (*lt) {
    double mean_ref = 0.0;
    if (lt_center)
      check(fbmlab_mean_local_time(lt_c.d, lt_c.hurst, lt_c.T, lt_eps, &mean_ref));
    std::ostringstream os;
    os.precision(17);
    os << "path_index,epsilon,L_eps,L_eps_centered";
    for (double g : lt_g) os << ",edwards_weight_g" << g;
    os << "\n";
    for (long i = 0; i < lt_paths; ++i) {
      fbmlab_path* path = nullptr;
      check(fbmlab_path_generate(lt_c.d, lt_c.hurst, lt_c.T, lt_n, lt_c.seed,
                                 uint64_t(i), FBMLAB_GEN_FAST, &path));
      double L = 0.0;
      check(fbmlab_local_time(path, lt_eps, &L));
      fbmlab_path_free(path);
      os << i << "," << lt_eps << "," << L << "," << (L - mean_ref);
      for (double g : lt_g) {
        double w = 0.0;
        check(fbmlab_edwards_weight(lt_center ? L - mean_ref : L, g, &w, nullptr));
        os << "," << w;
      }
      os << "\n";
    }
    write_output(lt_c.output, os.str());
    return 0;
  }

  if (*mean) {
    double v = 0.0;
    check(fbmlab_mean_local_time(mean_c.d, mean_c.hurst, mean_c.T, mean_eps, &v));
    if (mean_c.format == "csv") {
      write_output(mean_c.output, "eps,mean\n" + csv_line({mean_eps, v}));
      return 0;
    }
    json j = {{"operation", "mean"},
              {"params", {{"d", mean_c.d}, {"H", mean_c.hurst}, {"T", mean_c.T}}},
              {"eps", mean_eps},
              {"value", v}};
    if (mean_asy) {
      double a = 0.0;
      check(fbmlab_mean_asymptotic(mean_c.d, mean_c.hurst, mean_c.T, mean_eps, &a));
      j["asymptotic"] = a;
      j["ratio"] = v / a;
    }
    emit_json(mean_c, j, ms_since(t0));
    return 0;
  }

  auto emit_quad = [&](const Common& c, const char* op, double eps,
                       double gamma, const fbmlab_quad_config& cfg,
                       const fbmlab_quad_result& r) {
    if (c.format == "csv") {
      write_output(c.output, "eps,gamma,value,error\n" +
                                 csv_line({eps, gamma, r.value, r.abs_error}));
      return;
    }
    emit_json(
        c,
        {{"operation", op},
         {"params", {{"d", c.d}, {"H", c.hurst}, {"T", c.T}}},
         {"eps", eps},
         {"gamma", gamma},
         {"value", r.value},
         {"error", r.abs_error},
         {"cells", r.cells},
         {"converged", r.converged != 0},
         {"region_breakdown",
          {{"T1", r.region_t1}, {"T2", r.region_t2}, {"T3", r.region_t3}}},
         {"config",
          {{"rel_tol", cfg.rel_tol},
           {"max_cells", cfg.max_cells},
           {"softening_exponent", cfg.softening_exponent},
           {"boundary_margin", cfg.boundary_margin}}}},
        ms_since(t0));
  };

  if (*var) {
    const fbmlab_quad_config cfg = var_q.config();
    fbmlab_quad_result r;
    check(fbmlab_compute_e(var_c.d, var_c.hurst, var_c.T, var_eps, var_eps,
                           &cfg, &r));
    emit_quad(var_c, "var", var_eps, var_eps, cfg, r);
    return 0;
  }

  if (*ev) {
    const fbmlab_quad_config cfg = ev_q.config();
    fbmlab_quad_result r;
    check(fbmlab_compute_e(ev_c.d, ev_c.hurst, ev_c.T, ev_eps, ev_gamma, &cfg, &r));
    emit_quad(ev_c, "e-value", ev_eps, ev_gamma, cfg, r);
    return 0;
  }

  if (*rate) {
    if (rate_kmin >= rate_kmax) {
      std::cerr << "fbmlab: rate requires kmin < kmax\n";
      return 2;
    }
    std::vector<double> ladder;
    for (int k = rate_kmin; k <= rate_kmax; ++k)
      ladder.push_back(std::pow(2.0, -k));
    const fbmlab_quad_config cfg = rate_q.config();
    char* out = nullptr;
    check(fbmlab_rate_curve_json(rate_c.d, rate_c.hurst, rate_c.T,
                                 ladder.data(), int(ladder.size()), &cfg, &out));
    json j = json::parse(take_string(out));
    if (rate_c.format == "csv") {
      std::string csv = "eps,delta\n";
      for (const auto& p : j["points"])
        csv += csv_line({p["eps"].get<double>(), p["delta"].get<double>()});
      write_output(rate_c.output, csv);
    } else {
      emit_json(rate_c, j, ms_since(t0));
    }
    return 0;
  }

  if (*md) {
    if (md_ladder.empty())
      for (int k = 8; k <= 16; ++k) md_ladder.push_back(std::pow(10.0, -0.5 * k));
    char* out = nullptr;
    check(fbmlab_mean_divergence_json(md_c.d, md_c.hurst, md_c.T,
                                      md_ladder.data(), int(md_ladder.size()),
                                      &out));
    json j = json::parse(take_string(out));
    if (md_c.format == "csv") {
      std::string csv = "eps,mean\n";
      for (const auto& p : j["points"])
        csv += csv_line({p["eps"].get<double>(), p["mean"].get<double>()});
      write_output(md_c.output, csv);
    } else {
      emit_json(md_c, j, ms_since(t0));
    }
    return 0;
  }

  if (*dp) {
    const fbmlab_quad_config cfg = dp_q.config();
    char* out = nullptr;
    check(fbmlab_divergence_probe_json(dp_c.d, dp_c.hurst, dp_c.T, dp_levels,
                                       &cfg, &out));
    json j = json::parse(take_string(out));
    if (dp_c.format == "csv") {
      std::string csv = "level,cells,value\n";
      for (const auto& l : j["levels"])
        csv += csv_line({double(l["level"].get<int>()),
                         double(l["cells"].get<long>()),
                         l["value"].get<double>()});
      write_output(dp_c.output, csv);
    } else {
      emit_json(dp_c, j, ms_since(t0));
    }
    return 0;
  }

  if (*ed) {
    const json spec = experiment_spec_json(ed_c, ed_eps, ed_n, ed_paths, ed_g,
                                           ed_center);
    char* out = nullptr;
    check(fbmlab_run_experiment_json(spec.dump().c_str(), &out));
    json j = json::parse(take_string(out));
    if (ed_c.format == "csv") {
      const std::string want = ed_center ? "edwards_centered" : "edwards";
      std::string csv = "g,mean,std_error\n";
      for (const auto& s : j["statistics"])
        if (s["name"] == want && s.contains("g"))
          csv += csv_line({s["g"].get<double>(), s["mean"].get<double>(),
                           s["std_error"].get<double>()});
      write_output(ed_c.output, csv);
    } else {
      emit_json(ed_c, j, ms_since(t0));
    }
    return 0;
  }

  if (*tl) {
    json spec = experiment_spec_json(tl_c, tl_eps, tl_n, tl_paths, {}, true);
    char* out = nullptr;
    check(fbmlab_tail_probe_json(spec.dump().c_str(), tl_N.data(),
                                 int(tl_N.size()), &out));
    json j = json::parse(take_string(out));
    if (tl_c.format == "csv") {
      std::string csv = "N,count,probability\n";
      for (const auto& p : j["points"])
        csv += csv_line({p["N"].get<double>(), double(p["count"].get<long>()),
                         p["probability"].get<double>()});
      write_output(tl_c.output, csv);
    } else {
      emit_json(tl_c, j, ms_since(t0));
    }
    return 0;
  }

  if (*vb) {
    char* out = nullptr;
    check(fbmlab_verify_bounds_json(vb_c.d, vb_c.hurst, vb_c.T, vb_samples,
                                    vb_c.seed, &out));
    emit_json(vb_c, json::parse(take_string(out)), ms_since(t0));
    return 0;
  }

  if (*ac) {
    if (ac_suite != "fast" && ac_suite != "full") {
      std::cerr << "fbmlab: unknown suite '" << ac_suite
                << "' (expected fast or full)\n";
      return 2;
    }
    char* out = nullptr;
    int all_passed = 0;
    check(fbmlab_acceptance_json(ac_suite.c_str(), ac_c.threads, &out,
                                 &all_passed));
    json j = json::parse(take_string(out));
    for (const auto& c : j["criteria"])
      std::printf("[%s] %02d %-22s %8.1f ms  %s\n",
                  c["passed"].get<bool>() ? "PASS" : "FAIL",
                  c["id"].get<int>(), c["name"].get<std::string>().c_str(),
                  c["elapsed_ms"].get<double>(),
                  c["detail"].get<std::string>().c_str());
    std::printf("%s: %s\n", ac_suite.c_str(),
                all_passed ? "all criteria passed" : "CRITERIA FAILED");
    if (!ac_c.output.empty()) emit_json(ac_c, j, ms_since(t0));
    return all_passed ? 0 : 1;
  }

  return 2;
}
