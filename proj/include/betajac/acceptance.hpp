#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace betajac {

constexpr int kCriterionCount = 16;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;  // measured quantities against their tolerances
  double seconds = 0.0;
};

struct AcceptanceOptions {
  // Skips the two large Monte Carlo runs (CLT and extremal moments).
  bool quick = false;
  int threads = 0;
  std::uint64_t seed = 20240601;
  std::vector<int> only;  // empty means all
};

// Runs one criterion. Exceptions inside a criterion are reported as a
// failure with the message in the detail.
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

// "PASS  7 clt-desk-scale: ... (12.3 s)"
std::string format_line(const CriterionResult& result);

}  // namespace betajac
