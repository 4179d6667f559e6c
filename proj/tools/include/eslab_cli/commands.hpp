#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eslab/analysis.hpp"
#include "eslab_cli/scenario.hpp"

namespace eslab::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidationFailed = 2, kExitDiverged = 3 };

struct RunOptions {
  std::filesystem::path out_dir = "eslab_out";
  std::size_t threads = 1;
  bool quiet = false;
  bool write_files = true;
};

/// Flat key → value document of every closed form that applies to the
/// scenario. Keys are listed in the README.
json cmd_predict(const Scenario& scenario);

/// `scenario` with validation.prediction_overrides substituted.
Scenario with_prediction_overrides(const Scenario& scenario);

struct SimulateResult {
  std::vector<TrajectoryRecord> records;
  /// Over the trials that did not diverge; empty when all diverged.
  std::optional<EnsembleStats> stats;
  std::vector<std::size_t> diverged_trials;
  json summary;
};

SimulateResult cmd_simulate(const Scenario& scenario, const RunOptions& options);

struct FitInputs {
  std::optional<double> slope;
  std::optional<std::filesystem::path> drift_csv;
  std::optional<double> alpha;
  std::optional<std::size_t> population;
  std::optional<std::size_t> dimension;
};

/// Fits a drift curve (from CSV, or from a fresh simulation) or converts a
/// given slope into an effective dimension. Scenario values fill any
/// parameter not given in `inputs`; `scenario` may be null when all are given.
json cmd_fit(const Scenario* scenario, const FitInputs& inputs, const RunOptions& options);

struct EndpointInputs {
  std::optional<std::filesystem::path> theta_a;
  std::optional<std::filesystem::path> theta_b;
};

json cmd_interpolate(const Scenario& scenario, const EndpointInputs& inputs,
                     const RunOptions& options);
json cmd_probe(const Scenario& scenario, const std::optional<std::filesystem::path>& trained,
               const RunOptions& options);
json cmd_hierarchy(const Scenario& scenario, const RunOptions& options);

struct ValidationRow {
  std::string quantity;
  double predicted = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  bool diverged = false;
  bool pass() const;
};

ValidationReport cmd_validate(const Scenario& scenario, const RunOptions& options);

/// Whole command line, as `main` would run it. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eslab::cli
