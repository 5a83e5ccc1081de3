#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fbmlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double elapsed_ms = 0.0;
};

struct AcceptanceReport {
  std::string suite;
  std::vector<CriterionResult> criteria;
  bool all_passed = false;
  nlohmann::json to_json() const;
};

/// Runs the verification suite ("fast" or "full"). Thresholds are fixed in
/// code; threads <= 0 selects hardware concurrency for the Monte Carlo
/// criteria. Each criterion is independent: a failure is recorded, not
/// thrown.
AcceptanceReport run_acceptance(const std::string& suite, int threads = 0);

} // namespace fbmlab
