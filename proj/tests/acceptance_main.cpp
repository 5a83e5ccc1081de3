// Verification-suite driver: one line per criterion, nonzero exit on any
// failure. Usage: fbmlab_acceptance [fast|full] [threads]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "fbmlab/acceptance.hpp"

int main(int argc, char** argv) {
  const std::string suite = argc > 1 ? argv[1] : "full";
  const int threads = argc > 2 ? std::atoi(argv[2]) : 0;
  if (suite != "fast" && suite != "full") {
    std::fprintf(stderr, "unknown suite '%s' (expected fast or full)\n",
                 suite.c_str());
    return 2;
  }

  const fbmlab::AcceptanceReport rep = fbmlab::run_acceptance(suite, threads);
  for (const auto& c : rep.criteria)
    std::printf("[%s] %02d %-22s %9.1f ms  %s\n", c.passed ? "PASS" : "FAIL",
                c.id, c.name.c_str(), c.elapsed_ms, c.detail.c_str());
  std::printf("%s suite: %s\n", rep.suite.c_str(),
              rep.all_passed ? "all criteria passed" : "CRITERIA FAILED");
  return rep.all_passed ? 0 : 1;
}
