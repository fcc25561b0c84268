#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bilevel/core.hpp"
#include "bilevel/diagnostics.hpp"

namespace bilevel {

/// First order:  x' + grad f(x) + eps(t) grad h(x) = 0.
/// Second order: x'' + (alpha / t) x' + grad f(x) + eps(t) grad h(x) = 0.
struct FlowConfig {
  Order order = Order::First;
  double alpha = 4.0;
  /// eps(t) = c / t^delta; sched.t0 is overwritten by t0.
  Schedule sched;
  double t0 = 1.0;
  double t_end = 100.0;
  double dt = 0.01;
  Vector x0;
  /// Initial velocity (second order); zero when absent.
  std::optional<Vector> v0;
  int samples_per_decade = 256;
  /// Energy parameter for the E_lambda column; defaults as in the discrete case.
  std::optional<double> lambda;

  /// Largest admissible dt: min(0.1, 1 / (10 (L_f + eps(t0) L_h))).
  double max_dt(const BilevelProblem& prob) const;
  void validate(const BilevelProblem& prob) const;
};

struct FlowRecord {
  double t = 0.0;
  double F_res = 0.0;
  double H_gap = 0.0;
  double dist = 0.0;
  double eps = 0.0;
  /// ||x'(t)||.
  double step_norm = 0.0;
  std::optional<double> E_lambda;
  double F_value = 0.0;
  double H_value = 0.0;
};

struct FlowTrace {
  std::vector<FlowRecord> records;
  std::vector<Vector> positions;
  std::vector<Vector> velocities;
  std::string problem_id;
  Order order = Order::First;
  long long steps = 0;
  double wall_seconds = 0.0;
};

/// t0, t0 10^{1/n}, t0 10^{2/n}, ... below t_end, then t_end.
std::vector<double> log_time_grid(double t0, double t_end, int per_decade);

/// Fixed-step RK4 between consecutive grid times (each gap split into equal
/// substeps no longer than dt). Throws NonSmoothProblem unless f^ = h^ = 0.
FlowTrace integrate_first_flow(const BilevelProblem& prob, const FlowConfig& cfg);
FlowTrace integrate_second_flow(const BilevelProblem& prob, const FlowConfig& cfg);
FlowTrace integrate_flow(const BilevelProblem& prob, const FlowConfig& cfg);

struct LyapunovSeries {
  std::vector<double> t;
  std::vector<double> energy;
  /// Central differences of energy (one-sided at the ends).
  std::vector<double> energy_rate;
  std::vector<double> zeta;
  /// RHS - LHS of the continuous dissipation inequality using energy_rate.
  std::vector<double> slack;
  std::vector<double> tolerance;
};

/// First order: E = t (Psi_t(x) - Psi_t(x*)) + lambda/2 ||x - x*||^2,
///   zeta = (lambda - 1) eps - t eps', checked as
///   E' + zeta (h - h*) <= -(lambda - 1) (f - f*).
/// Second order: E = t^2 (Psi_t(x) - Psi_t(x*)) + 1/2 ||lambda (x - x*) + t x'||^2
///   + lambda (alpha - 1 - lambda) / 2 ||x - x*||^2, zeta = t (lambda - 2) eps - t^2 eps',
///   checked as E' + zeta (h - h*) + (alpha - 1 - lambda) t ||x'||^2 <= -t (lambda - 2) (f - f*).
/// Tolerance 1e-6 (1 + |E|).
LyapunovSeries continuous_lyapunov(const BilevelProblem& prob, const FlowConfig& cfg,
                                   const FlowTrace& trace, double lambda);

double continuous_energy(const BilevelProblem& prob, const FlowConfig& cfg, double lambda, double t,
                         const Vector& x, const Vector& velocity);

}  // namespace bilevel
