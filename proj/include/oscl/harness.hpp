#pragma once

#include <optional>
#include <string>

#include "oscl/prob.hpp"

namespace oscl {

struct RunResult {
  int exit_code = 0;  // 0 ok; 1 configuration error; 2 premise violation under strict
  Json report;
};

// Dispatches one experiment. `seed`, `trials` and `workers` override the
// config when present; identical inputs produce byte-identical reports
// apart from the wall_ms field.
RunResult run_experiment(const std::string& subcommand, const Json& config,
                         std::optional<uint64_t> seed, std::optional<size_t> trials,
                         std::optional<size_t> workers, bool strict);

// CSV text for reports carrying a "rows" array; empty string otherwise.
std::string report_csv(const Json& report);

// Drops volatile fields (wall_ms) everywhere in the report.
Json strip_volatile(Json report);

struct GoldenResult {
  size_t checked = 0;
  std::vector<std::string> failures;
  bool pass = true;
  bool empty = false;
};

// Re-runs every *.json golden file in `dir` (schema: subcommand, config,
// seed, trials, report) and byte-compares the stripped reports.
GoldenResult golden_check(const std::string& dir);

}  // namespace oscl
