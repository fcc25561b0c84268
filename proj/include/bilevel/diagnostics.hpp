#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bilevel/core.hpp"
#include "bilevel/trace.hpp"

namespace bilevel {

enum class Order { First, Second };

/// t_k = theta (k + gamma). alpha is only used by second-order energies.
struct LyapunovParams {
  double lambda = 2.0;
  double theta = 1.0;
  double gamma = 0.0;
  double alpha = 4.0;

  double t(long long k) const { return theta * (static_cast<double>(k) + gamma); }
  /// lambda > 1 (first order) or lambda in (2, alpha - 1) (second order).
  void validate(Order order) const;
};

double default_lambda(Order order, double alpha);

/// t_k (Psi_{k-1}(x_k) - Psi_{k-1}(x*)) + lambda/2 ||x_k - x*||^2.
double lyapunov_first(const BilevelProblem& prob, const Schedule& sched,
                      const LyapunovParams& params, long long k, const Vector& x_k);
/// t_k^2 (Psi_{k-1}(x_k) - Psi_{k-1}(x*))
///   + 1/2 ||lambda (x_{k-1} - x*) + t_k (x_k - x_{k-1}) / theta||^2
///   + lambda (alpha - 1 - lambda) / 2 ||x_{k-1} - x*||^2.
double lyapunov_second(const BilevelProblem& prob, const Schedule& sched,
                       const LyapunovParams& params, long long k, const Vector& x_k,
                       const Vector& x_km1);

/// theta (lambda - 1) eps_k - t_k (eps_k - eps_{k-1}).
double zeta_first(const Schedule& sched, const LyapunovParams& params, long long k);
/// theta ((lambda - 2) t_k + theta (lambda - 1)) eps_k - t_k^2 (eps_k - eps_{k-1}).
double zeta_second(const Schedule& sched, const LyapunovParams& params, long long k);
double zeta(Order order, const Schedule& sched, const LyapunovParams& params, long long k);

struct DissipationReport {
  std::vector<long long> k;
  /// RHS - LHS of the dissipation inequality at each k.
  std::vector<double> slack;
  std::vector<double> tolerance;
  std::vector<double> energy;
  /// First index from which slack >= -tolerance for every later k; -1 if the
  /// last checked index already fails or nothing was checked.
  long long k0 = -1;
  double worst_slack = 0.0;
  std::size_t violations = 0;
};

/// Checks E_{k+1} - E_k + zeta_k (H(x_k) - H*) <= -theta (lambda - 1) (F(x_k) - F*)
/// along a BPG trace, tolerance 1e-9 (1 + |E_k|).
DissipationReport check_dissipation_first(const BilevelProblem& prob, const Schedule& sched,
                                          const LyapunovParams& params, const RunTrace& trace);
/// Second-order counterpart with the velocity term
/// (alpha - 1 - lambda) theta t_{k+1} alpha_k ||(x_k - x_{k-1}) / theta||^2 on the left
/// and -theta^2 (lambda - 2) k (F(x_k) - F*) on the right.
DissipationReport check_dissipation_second(const BilevelProblem& prob, const Schedule& sched,
                                           const LyapunovParams& params, const RunTrace& trace);

enum class TraceField { F_res, H_gap, AbsH_gap, Dist, Eps, StepNorm, E_lambda };

const char* trace_field_name(TraceField f);
TraceField parse_trace_field(const std::string& name);
double field_value(const TraceRecord& r, TraceField f);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least squares of log(value) on log(k) over rows with k in [k_lo, k_hi].
/// Throws NonPositiveValues if a value in the window is <= 0 or missing.
RateFit fit_rate(const RunTrace& trace, TraceField field, std::pair<long long, long long> window);
RateFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// sum_l w_l x_l / sum_l w_l.
Vector weighted_average(const std::vector<Vector>& xs, const std::vector<double>& weights);

struct BestIterate {
  Vector x_best;
  Vector x_bar;
  /// "average" or "last".
  std::string which;
};

/// zeta-weighted average of x_{k0..k} and the better (in H) of it and x_{k+1}.
/// Needs full iterate storage.
BestIterate best_iterate(const BilevelProblem& prob, const RunTrace& trace, const Schedule& sched,
                         const LyapunovParams& params, Order order, long long k,
                         long long k0 = 1);

struct HolderReport {
  /// min over samples of (F(x) - min F) / (tau / rho dist^rho).
  double worst_ratio = kInfinity;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  bool passed = true;
  /// min over samples of ||p*|| ((F - F*) / (tau / rho))^{1/rho} - (H(x*) - H(x));
  /// only filled when the oracle carries ||p*||.
  double worst_bound_slack = kInfinity;
  bool bound_checked = false;
  bool bound_holds = true;
};

/// Evaluates the growth inequality at each sample; a ratio below 1 - 1e-9 fails.
HolderReport check_holder_growth(const BilevelProblem& prob, const std::vector<Vector>& samples);

/// Closed-form brackets of sum_{l=k0}^{k} l^{-r} (k0 >= 2 for the upper bound).
std::pair<double, double> sum_power_bounds(double r, long long k0, long long k);

struct ZetaSandwich {
  double c1 = 0.0;
  double c2 = 0.0;
  bool holds = false;
};

/// C1 = min zeta_k / (k^{eta-1} eps_{k-1}), C2 = max zeta_k / (k^{eta-1} eps_k)
/// over k in [k_lo, k_hi], eta = 1 (first order) or 2; holds when 0 < C1 and C2 < inf.
ZetaSandwich zeta_sandwich(Order order, const Schedule& sched, const LyapunovParams& params,
                           long long k_lo, long long k_hi);

/// max - min of E_lambda over rows with k in [k_lo, k_hi].
double tail_oscillation(const RunTrace& trace, long long k_lo, long long k_hi);

}  // namespace bilevel
