#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fbmlab/fbm.hpp"
#include "fbmlab/params.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fbmlab {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
  int n_batches = 0;
  uint64_t seed = 0;
  double saturated_fraction = 0.0; ///< share of clamped Edwards exponents
};

enum class CenterMode { none, quadrature_mean };

struct ExperimentSpec {
  ModelParams params;
  double eps = 0.1;
  int grid_n = 512;
  long n_paths = 10'000;
  std::vector<double> g_list;
  CenterMode center_mode = CenterMode::none;
  uint64_t seed = 1;
  int n_batches = 50;
  int threads = 0; ///< 0 = hardware concurrency
  GenMethod method = GenMethod::fast;

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentSpec from_json(const nlohmann::json& j);
};

struct Statistic {
  std::string name;
  bool has_g = false;
  double g = 0.0;
  McEstimate estimate;
};

struct ExperimentReport {
  ExperimentSpec spec;
  double mean_reference = 0.0; ///< quadrature mean used for centering
  std::vector<Statistic> statistics;
  double min_centered = 0.0;
  long floor_violations = 0; ///< centered samples below -mean_reference - 1e-12

  const McEstimate* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// Generates spec.n_paths paths, accumulates the local time, its centered
/// version and the Edwards weights per g, and reports batch-mean estimates
/// for E(L), Var(L) and E[exp(-g .)]. Paths are distributed over workers by
/// index with counter-based streams, and every reduction runs in path
/// order, so the report is a pure function of the spec.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// (g, estimate) view of an experiment's Edwards statistics; when centering
/// is active and dH < 1 the uncentered curve is included as well.
std::vector<std::pair<double, McEstimate>> edwards_curve(
    const ExperimentReport& report, bool centered);

struct TailPoint {
  double threshold = 0.0;   ///< N
  long count = 0;           ///< samples with centered value <= -N
  double probability = 0.0;
};

struct TailReport {
  ExperimentSpec spec;
  double mean_reference = 0.0; ///< hard floor: centered >= -mean_reference
  std::vector<TailPoint> points;
  nlohmann::json to_json() const;
};

/// Empirical lower-tail frequencies P(centered <= -N); requires
/// quadrature-mean centering.
TailReport tail_probe(const ExperimentSpec& spec,
                      const std::vector<double>& thresholds);

/// Runs fn(i) for i in [0, n) on the requested number of workers.
void parallel_for_index(long n, int threads, const std::function<void(long)>& fn);

} // namespace fbmlab
