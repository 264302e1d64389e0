#pragma once

// The runnable invariant gate: growth bounds, slicing lower bound, datum
// upper bound, monotonicity surrogate, gluing estimate, rescaling identity,
// subadditivity, covariance, and trend checks for the stability of cell
// minima under cube shifts, inflation and normal perturbations.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace phasecell {

enum class VerifyLevel { Fast, Full };

struct CheckResult {
  std::string name;
  bool pass = false;
  // measured values, reported in insertion order
  std::vector<std::pair<std::string, double>> measured;
  std::string tolerance;  // human-readable statement of the asserted bound
  double runtime_ms = 0.0;
};

struct VerifyReport {
  VerifyLevel level = VerifyLevel::Fast;
  std::uint64_t master_seed = 0;
  std::vector<CheckResult> checks;
  bool overall = false;
};

// Individual check failures never abort the suite.
VerifyReport run_suite(VerifyLevel level, std::uint64_t master_seed, int jobs = 1);

// Canonical JSON rendering; runtimes are included only when with_timings is
// set, so the default report is byte-identical across reruns.
std::string report_to_json(const VerifyReport& report, bool with_timings = false);

}  // namespace phasecell
