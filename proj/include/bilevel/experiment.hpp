#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bilevel/config.hpp"

namespace bilevel {

const char* git_hash();

struct RunCell {
  std::string id;
  std::size_t method_index = 0;
  std::optional<double> sweep_value;
  SolverConfig solver;
  std::filesystem::path file;
};

/// One cell per (method x sweep value), in method-major order.
std::vector<RunCell> expand_cells(const ExperimentConfig& cfg);

struct FlowCell {
  std::string id;
  std::size_t flow_index = 0;
  std::optional<double> sweep_value;
  FlowSpec spec;
  std::filesystem::path file;
};

std::vector<FlowCell> expand_flow_cells(const ExperimentConfig& cfg);

/// Builds the configured problem. Logistic problems get their reference
/// oracle from explicit values, the cache file, or a fresh reference run (in
/// that order); `oracle_info` receives a description for the manifest.
BilevelProblem build_problem(const ExperimentConfig& cfg, kernels::Backend backend,
                             Json* oracle_info = nullptr);

struct BatchOptions {
  int jobs = 1;
  bool force = false;
  /// Progress lines; nullptr for silence.
  std::ostream* log = nullptr;
};

/// Executes every run cell, writes runs/<id>.csv and manifest.json under
/// cfg.output_dir, and returns the manifest. Refuses to overwrite an existing
/// manifest unless options.force. Solver failures are recorded per run.
Json run_batch(const ExperimentConfig& cfg, const BatchOptions& options);

/// Integrates every flow cell, writes flows/<id>.csv and flow_manifest.json.
Json flow_batch(const ExperimentConfig& cfg, const BatchOptions& options);

/// Reuses the runs of an existing manifest (running the batch first when there
/// is none) and writes compare/compare.csv plus one plot-data file per panel.
/// Throws IoError naming every run whose CSV is missing.
void compare_batch(const ExperimentConfig& cfg, const BatchOptions& options);

/// Reads manifest.json and the run CSVs of output_dir, prints a table of
/// fitted slopes, dissipation indices and final distances, and writes
/// report.json. Returns the report.
Json report(const std::filesystem::path& output_dir, std::ostream& out);

}  // namespace bilevel
