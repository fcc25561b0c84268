#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bilevel/algorithms.hpp"
#include "bilevel/flows.hpp"
#include "bilevel/problems.hpp"

namespace bilevel {

using Json = nlohmann::ordered_json;

struct NemirovskyProblem {
  NemirovskySpec spec;
};

struct LogisticProblem {
  /// Resolved against data_dir() when relative. Empty when synthetic.
  std::string csv_path;
  std::optional<std::uint64_t> synthetic_seed;
  Eigen::Index synthetic_n = 455;
  Eigen::Index synthetic_p = 30;
  LogisticLiftSpec lift;
  ReferenceSpec reference;
  /// Explicit reference values skip the reference run.
  std::optional<ReferenceValues> reference_values;
  /// Cache file for computed reference values; empty disables caching.
  std::string reference_cache;
};

struct MinNormProblem {
  Eigen::Index m = 5;
  Eigen::Index d = 20;
  std::uint64_t seed = 1;
  /// Explicit instance (A row-major, b); overrides m, d, seed when set.
  std::optional<Eigen::MatrixXd> A;
  std::optional<Vector> b;
};

using ProblemSpec = std::variant<NemirovskyProblem, LogisticProblem, MinNormProblem>;

/// Starting point: zero, constant, Gaussian (seeded, optionally shifted by x*),
/// or an explicit vector.
struct StartSpec {
  std::string kind = "zero";
  double value = 0.0;
  std::uint64_t seed = 0;
  double scale = 1.0;
  bool around_solution = false;
  std::vector<double> explicit_values;
};

struct MethodSpec {
  std::string label;
  SolverConfig solver;
};

struct SweepSpec {
  std::string parameter = "delta";
  std::vector<double> values;
};

struct DiagnosticsFlags {
  bool lyapunov = true;
  bool dissipation = false;
  bool best_iterate = false;
  bool holder_check = false;
  std::size_t holder_samples = 1000;
  /// Fit window for reported slopes; the last decade when absent.
  std::optional<std::pair<long long, long long>> fit_window;
};

struct FlowSpec {
  std::string label;
  FlowConfig flow;
  /// dt derived as dt_fraction * max_dt when dt is absent.
  std::optional<double> dt;
  double dt_fraction = 1.0;
  StartSpec x0;
};

struct CompareSpec {
  bool svg = false;
  /// delta of the guide slopes k^{-delta/2}, k^{-delta}; taken from the first
  /// second-order method when absent.
  std::optional<double> guide_delta;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  StartSpec x0;
  std::vector<MethodSpec> methods;
  std::optional<SweepSpec> sweep;
  DiagnosticsFlags diagnostics;
  std::filesystem::path output_dir = "out";
  long long record_every = 1;
  std::vector<FlowSpec> flows;
  std::optional<SweepSpec> flow_sweep;
  CompareSpec compare;
  /// The configuration tree after overrides and with sweep values made
  /// explicit; re-parsing it yields the same experiment.
  Json resolved;
};

/// Reads a config file. A manifest written by a previous run is accepted and
/// its embedded configuration returned. Throws IoError / ValidationError.
Json load_config_file(const std::filesystem::path& path);

/// Applies `path=value` overrides; value is parsed as JSON and falls back to a
/// plain string. Numeric path components index arrays.
Json apply_overrides(Json tree, const std::vector<std::string>& sets);

/// Validates the tree and builds the experiment. Sweeps given as a range are
/// expanded to an evenly spaced interior grid, or to sorted uniform draws when
/// sample_seed is set.
ExperimentConfig parse_config(const Json& tree, std::optional<std::uint64_t> sample_seed = {});

/// delta values admissible for a sweep cell: (0, 2] for momentum methods,
/// (0, 1] after halving for first-order ones, (1/2, 1] for Bi-SG-II.
void validate_sweep_value(const MethodSpec& m, const std::string& parameter, double value,
                          const std::string& path);

/// Applies a sweep value to a method (delta is halved for first-order methods).
SolverConfig apply_sweep(const SolverConfig& cfg, const std::string& parameter, double value);

Vector make_start(const StartSpec& s, const BilevelProblem& prob, const std::string& path);

}  // namespace bilevel
