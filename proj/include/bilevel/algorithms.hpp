#pragma once

#include <functional>
#include <optional>
#include <string>

#include "bilevel/core.hpp"
#include "bilevel/kernels.hpp"
#include "bilevel/trace.hpp"

namespace bilevel {

enum class Method { BPG, BFPG, FBiPG, StaBiM, BiSG2 };

const char* method_name(Method m);
/// Accepts the names produced by method_name (case-insensitive).
Method parse_method(const std::string& name);
/// True for the momentum methods (BFPG, FBiPG).
bool is_second_order(Method m);

struct SolverConfig {
  Method method = Method::BPG;
  /// theta for BPG/staBiM/BiSG2, s for BFPG/FBiPG. Derived from
  /// step_fraction when absent.
  std::optional<double> step;
  double alpha = 4.0;
  double gamma = 0.0;
  Schedule schedule;
  long long max_iter = 1000;
  double step_fraction = 0.95;
  double stabim_theta_tilde = 0.95;
  double stabim_eta0 = 1.0;
  double stabim_eta_shrink = 0.75;
  kernels::Backend backend = kernels::Backend::Parallel;
};

/// Largest admissible step for the method: 2/L_f for BPG, 1/L_f otherwise.
double max_step(Method m, const BilevelProblem& prob);
/// cfg.step if set, else step_fraction * max_step.
double resolved_step(const SolverConfig& cfg, const BilevelProblem& prob);
/// Throws ValidationError (with the field path) when cfg is inadmissible.
void validate(const SolverConfig& cfg, const BilevelProblem& prob);

/// BFPG parameters FBi-PG reduces to: gamma = beta = alpha - 1, c = 1.
SolverConfig fbipg_as_bfpg(const SolverConfig& cfg);

struct SolverState {
  long long k = 0;
  Vector x_curr;
  Vector x_prev;
  Vector y;
  double stabim_eta = 1.0;
  double theta_k = 0.0;
};

/// x_0 for BPG/staBiM/BiSG2 (k = 0); x_1 = x_prev = x_0 for the momentum
/// methods (k = 1).
SolverState initial_state(const BilevelProblem& prob, const SolverConfig& cfg, const Vector& x0);

/// Regularization weight the method applies at iteration k.
double method_epsilon(const SolverConfig& cfg, long long k);
/// alpha_k = 1 - alpha / (k + gamma + 1).
double momentum_coefficient(double alpha, double gamma, long long k);

SolverState step_bpg(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state);
SolverState step_bfpg(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state);
SolverState step_fbipg(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state);
SolverState step_stabim(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state);
SolverState step_bisg2(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state);
/// Dispatches on cfg.method.
SolverState step(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state);

struct IterationView {
  long long k;
  const Vector& x;
  const Vector& x_prev;
  double eps;
};

using Observer = std::function<void(const IterationView&)>;

struct RunOptions {
  /// Keep every record_every-th row (the final row is always kept).
  long long record_every = 1;
  bool store_iterates = true;
  /// Energy parameter lambda; defaults to 2 (first order) or (alpha + 1) / 2.
  std::optional<double> lyapunov_lambda;
  bool compute_energy = true;
};

/// Runs max_iter steps from x0. Step errors and divergence end the run early
/// and are reported through trace.failed / trace.error with the rows computed
/// so far. Configuration errors throw.
RunTrace run(const BilevelProblem& prob, const SolverConfig& cfg, const Vector& x0,
             const Observer& observer = {}, const RunOptions& options = {});

}  // namespace bilevel
