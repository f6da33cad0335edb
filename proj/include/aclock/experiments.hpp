#pragma once

#include "aclock/config.hpp"
#include "aclock/report_io.hpp"

#include <cstddef>
#include <string>
#include <vector>

/// Named experiments run over a configuration grid. Every row carries its
/// parameters, the measured or computed quantities with standard errors, and
/// pass_* columns for the checks that decide the exit status.
namespace aclock::experiments {

struct RunResult {
  io::Table table;
  std::size_t failed_checks = 0;

  [[nodiscard]] bool passed() const { return failed_checks == 0; }
};

/// Column names of an experiment's result table (fixed, so that an empty
/// grid still produces a header).
std::vector<std::string> columns(const std::string& experiment);

/// Runs every grid point in order. Point i draws from stream i of the
/// configured seed, so output does not depend on `config.threads`.
/// Module errors are rethrown with the grid point prepended.
RunResult run(const config::ExperimentConfig& config);

} // namespace aclock::experiments
