#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dklab/config.hpp"
#include "dklab/verify.hpp"

namespace dklab {

struct RunOptions {
  unsigned threads = 1;
  std::filesystem::path output_dir = ".";
};

struct ExperimentResult {
  std::vector<VerificationReport> reports;
  std::vector<std::filesystem::path> files;
  bool all_passed() const;
};

/// Runs one experiment, writes its CSV files and prints one summary line per report to `log`.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

/// 0 when every report passed, 1 otherwise.
int exit_status(const ExperimentResult& result);

/// Fast deterministic checks of the documented edge cases; prints one line per
/// check and returns the number of failures.
int run_selftest(std::ostream& log);

}  // namespace dklab
