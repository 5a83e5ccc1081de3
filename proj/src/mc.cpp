#include "fbmlab/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "fbmlab/kernels.hpp"
#include "fbmlab/local_time.hpp"

namespace fbmlab {

void ExperimentSpec::validate() const {
  params.validate();
  if (!(eps > 0.0)) throw std::domain_error("experiment needs eps > 0");
  if (grid_n < 2) throw std::domain_error("experiment needs grid_n >= 2");
  if (n_paths < 1) throw std::domain_error("experiment needs n_paths >= 1");
  if (n_batches < 2) throw std::domain_error("experiment needs n_batches >= 2");
  if (threads < 0) throw std::domain_error("threads must be >= 0");
  for (double g : g_list)
    if (g < 0.0) throw std::domain_error("Edwards couplings must be >= 0");
}

void parallel_for_index(long n, int threads,
                        const std::function<void(long)>& fn) {
  int workers = threads > 0 ? threads : int(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = int(std::min<long>(workers, n));
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers));
  for (int wkr = 0; wkr < workers; ++wkr) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// Mean over path order plus a batch-mean standard error; batches are the
// contiguous index ranges [b n / B, (b+1) n / B).
McEstimate batch_estimate(const std::vector<double>& x, int n_batches,
                          uint64_t seed) {
  const long n = long(x.size());
  const int B = int(std::min<long>(n_batches, n));
  McEstimate est;
  est.n_paths = n;
  est.n_batches = B;
  est.seed = seed;

  Kahan full;
  for (double v : x) full.add(v);
  est.mean = full.sum / double(n);

  std::vector<double> bm(size_t(B), 0.0);
  for (int b = 0; b < B; ++b) {
    const long lo = n * b / B, hi = n * (b + 1) / B;
    Kahan acc;
    for (long i = lo; i < hi; ++i) acc.add(x[size_t(i)]);
    bm[size_t(b)] = acc.sum / double(hi - lo);
  }
  double s2 = 0.0;
  for (double v : bm) s2 += (v - est.mean) * (v - est.mean);
  est.std_error = std::sqrt(s2 / double(B - 1) / double(B));
  return est;
}

// Unbiased sample variance with a batch-variance standard error.
McEstimate variance_estimate(const std::vector<double>& x, int n_batches,
                             uint64_t seed) {
  const long n = long(x.size());
  const int B = int(std::min<long>(n_batches, n / 2 > 1 ? n / 2 : 2));
  McEstimate est;
  est.n_paths = n;
  est.n_batches = B;
  est.seed = seed;

  Kahan mean_acc;
  for (double v : x) mean_acc.add(v);
  const double mean = mean_acc.sum / double(n);
  Kahan var_acc;
  for (double v : x) var_acc.add((v - mean) * (v - mean));
  est.mean = var_acc.sum / double(n - 1);

  std::vector<double> bv;
  bv.reserve(size_t(B));
  for (int b = 0; b < B; ++b) {
    const long lo = n * b / B, hi = n * (b + 1) / B;
    if (hi - lo < 2) continue;
    Kahan m;
    for (long i = lo; i < hi; ++i) m.add(x[size_t(i)]);
    const double bm = m.sum / double(hi - lo);
    Kahan v2;
    for (long i = lo; i < hi; ++i) v2.add((x[size_t(i)] - bm) * (x[size_t(i)] - bm));
    bv.push_back(v2.sum / double(hi - lo - 1));
  }
  double bmean = 0.0;
  for (double v : bv) bmean += v;
  bmean /= double(bv.size());
  double s2 = 0.0;
  for (double v : bv) s2 += (v - bmean) * (v - bmean);
  est.std_error = std::sqrt(s2 / double(bv.size() - 1) / double(bv.size()));
  return est;
}

} // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const bool centered = spec.center_mode == CenterMode::quadrature_mean;
  const double mean_ref =
      centered ? mean_local_time(spec.params, spec.eps) : 0.0;

  const long n = spec.n_paths;
  const size_t ng = spec.g_list.size();
  std::vector<double> L(static_cast<size_t>(n), 0.0);
  // per-g weights in the requested mode, plus the uncentered curve when the
  // mode is centered and the uncentered limit exists (dH < 1)
  const bool also_uncentered = centered && spec.params.strong_regime();
  std::vector<std::vector<double>> W(ng, std::vector<double>(size_t(n)));
  std::vector<std::vector<double>> WU(
      also_uncentered ? ng : 0, std::vector<double>(size_t(n)));
  std::vector<uint8_t> saturated(size_t(n) * (ng ? ng : 1), 0);

  const TimeGrid grid = TimeGrid::uniform(spec.grid_n, spec.params.horizon);
  parallel_for_index(n, spec.threads, [&](long i) {
    const Path path = generate_path(spec.params, grid, spec.seed, uint64_t(i),
                                    spec.method);
    LocalTimeEstimate est = local_time(path, spec.eps);
    est = center(est, mean_ref);
    L[size_t(i)] = est.value;
    for (size_t k = 0; k < ng; ++k) {
      const EdwardsWeight w = edwards_weight(est, spec.g_list[k], centered);
      W[k][size_t(i)] = w.weight;
      saturated[size_t(i) * ng + k] = w.saturated ? 1 : 0;
      if (also_uncentered)
        WU[k][size_t(i)] = edwards_weight(est, spec.g_list[k], false).weight;
    }
  });

  ExperimentReport rep;
  rep.spec = spec;
  rep.mean_reference = mean_ref;
  rep.statistics.push_back(
      {"mean_local_time", false, 0.0, batch_estimate(L, spec.n_batches, spec.seed)});
  rep.statistics.push_back(
      {"var_local_time", false, 0.0, variance_estimate(L, spec.n_batches, spec.seed)});
  for (size_t k = 0; k < ng; ++k) {
    McEstimate est = batch_estimate(W[k], spec.n_batches, spec.seed);
    long sat = 0;
    for (long i = 0; i < n; ++i) sat += saturated[size_t(i) * ng + k];
    est.saturated_fraction = double(sat) / double(n);
    rep.statistics.push_back(
        {centered ? "edwards_centered" : "edwards", true, spec.g_list[k], est});
  }
  if (also_uncentered)
    for (size_t k = 0; k < ng; ++k)
      rep.statistics.push_back({"edwards", true, spec.g_list[k],
                                batch_estimate(WU[k], spec.n_batches, spec.seed)});

  rep.min_centered = n ? L[0] - mean_ref : 0.0;
  for (long i = 0; i < n; ++i) {
    const double c = L[size_t(i)] - mean_ref;
    rep.min_centered = std::min(rep.min_centered, c);
    if (c < -mean_ref - 1e-12) ++rep.floor_violations;
  }
  return rep;
}

std::vector<std::pair<double, McEstimate>> edwards_curve(
    const ExperimentReport& report, bool centered) {
  const std::string want = centered ? "edwards_centered" : "edwards";
  std::vector<std::pair<double, McEstimate>> curve;
  for (const auto& s : report.statistics)
    if (s.has_g && s.name == want) curve.emplace_back(s.g, s.estimate);
  return curve;
}

TailReport tail_probe(const ExperimentSpec& spec,
                      const std::vector<double>& thresholds) {
  if (spec.center_mode != CenterMode::quadrature_mean)
    throw std::domain_error("tail probe requires quadrature-mean centering");
  ExperimentSpec s = spec;
  s.g_list.clear();
  s.validate();
  const double mean_ref = mean_local_time(s.params, s.eps);

  const long n = s.n_paths;
  std::vector<double> centered(static_cast<size_t>(n), 0.0);
  const TimeGrid grid = TimeGrid::uniform(s.grid_n, s.params.horizon);
  parallel_for_index(n, s.threads, [&](long i) {
    const Path path = generate_path(s.params, grid, s.seed, uint64_t(i), s.method);
    centered[size_t(i)] = local_time(path, s.eps).value - mean_ref;
  });

  TailReport rep;
  rep.spec = s;
  rep.mean_reference = mean_ref;
  for (double N : thresholds) {
    TailPoint p;
    p.threshold = N;
    for (long i = 0; i < n; ++i)
      if (centered[size_t(i)] <= -N) ++p.count;
    p.probability = double(p.count) / double(n);
    rep.points.push_back(p);
  }
  return rep;
}

const McEstimate* ExperimentReport::find(const std::string& name) const {
  for (const auto& s : statistics)
    if (s.name == name && !s.has_g) return &s.estimate;
  return nullptr;
}

// ---- JSON --------------------------------------------------------------

// The worker count is an execution detail, not part of the experiment's
// identity, so it is accepted on input but never echoed.
nlohmann::json ExperimentSpec::to_json() const {
  return {{"d", params.d},
          {"H", params.hurst},
          {"T", params.horizon},
          {"eps", eps},
          {"grid_n", grid_n},
          {"n_paths", n_paths},
          {"g_list", g_list},
          {"center_mode",
           center_mode == CenterMode::quadrature_mean ? "quadrature_mean" : "none"},
          {"seed", seed},
          {"n_batches", n_batches},
          {"method", method == GenMethod::dense ? "dense" : "fast"}};
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  s.params.d = j.value("d", 2);
  s.params.hurst = j.value("H", 0.5);
  s.params.horizon = j.value("T", 1.0);
  s.eps = j.value("eps", 0.1);
  s.grid_n = j.value("grid_n", 512);
  s.n_paths = j.value("n_paths", long(10'000));
  s.g_list = j.value("g_list", std::vector<double>{});
  const std::string cm = j.value("center_mode", "none");
  if (cm == "quadrature_mean")
    s.center_mode = CenterMode::quadrature_mean;
  else if (cm == "none")
    s.center_mode = CenterMode::none;
  else
    throw std::domain_error("center_mode must be none or quadrature_mean");
  s.seed = j.value("seed", uint64_t(1));
  s.n_batches = j.value("n_batches", 50);
  s.threads = j.value("threads", 0);
  const std::string m = j.value("method", "fast");
  if (m == "dense")
    s.method = GenMethod::dense;
  else if (m == "fast")
    s.method = GenMethod::fast;
  else
    throw std::domain_error("method must be dense or fast");
  return s;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& s : statistics) {
    nlohmann::json e = {{"name", s.name},
                        {"mean", s.estimate.mean},
                        {"std_error", s.estimate.std_error},
                        {"n_paths", s.estimate.n_paths},
                        {"n_batches", s.estimate.n_batches},
                        {"saturated_fraction", s.estimate.saturated_fraction}};
    if (s.has_g) e["g"] = s.g;
    stats.push_back(e);
  }
  return {{"spec", spec.to_json()},
          {"statistics", stats},
          {"floors",
           {{"mean_reference", mean_reference},
            {"min_centered", min_centered},
            {"floor_violations", floor_violations}}}};
}

nlohmann::json TailReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points)
    pts.push_back({{"N", p.threshold},
                   {"count", p.count},
                   {"probability", p.probability}});
  return {{"spec", spec.to_json()},
          {"floors", {{"mean_reference", mean_reference}}},
          {"points", pts}};
}

} // namespace fbmlab
