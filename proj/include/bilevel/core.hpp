#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "bilevel/errors.hpp"
#include "bilevel/prox.hpp"

namespace bilevel {

/// Regularization schedule eps_k = c / (k + beta)^delta and its continuous
/// counterpart eps(t) = c / t^delta for t >= t0.
///
/// A schedule built with `Schedule::zero()` evaluates to 0 everywhere; it is
/// used to reduce the bilevel methods to their single-level parents.
struct Schedule {
  double c = 1.0;
  double delta = 1.0;
  double beta = 1.0;
  double t0 = 1.0;
  bool vanishing_off = false;

  static Schedule zero() {
    Schedule s;
    s.c = 0.0;
    s.vanishing_off = true;
    return s;
  }

  /// Throws ValidationError unless c, delta, beta, t0 are all positive.
  void validate() const;
};

double epsilon_discrete(const Schedule& sched, long long k);
double epsilon_continuous(const Schedule& sched, double t);
/// d/dt eps(t) = -delta c t^(-delta-1).
double epsilon_continuous_rate(const Schedule& sched, double t);

/// Convex differentiable term with an L-Lipschitz gradient.
class SmoothTerm {
 public:
  using EvalFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;

  SmoothTerm() = default;
  SmoothTerm(EvalFn eval, GradFn grad, double lipschitz, std::string name = "smooth");

  static SmoothTerm zero();
  /// (weight / 2) ||x||^2.
  static SmoothTerm squared_norm(double weight = 1.0);

  double eval(const Vector& x) const { return is_zero_ ? 0.0 : eval_(x); }
  Vector grad(const Vector& x) const {
    return is_zero_ ? Vector::Zero(x.size()) : grad_(x);
  }
  double lipschitz() const { return lipschitz_; }
  bool is_zero() const { return is_zero_; }
  const std::string& name() const { return name_; }

 private:
  EvalFn eval_;
  GradFn grad_;
  double lipschitz_ = 0.0;
  bool is_zero_ = true;
  std::string name_ = "zero";
};

struct CompositeObjective {
  SmoothTerm smooth;
  ProxTerm nonsmooth;

  double value(const Vector& x) const;
};

struct HolderData {
  double rho = 2.0;
  double tau = 1.0;
  /// rho* with 1/rho + 1/rho* = 1.
  double dual_exponent() const { return rho / (rho - 1.0); }
};

/// Known solution data for a problem instance. `x_star` is absent when no
/// bilevel solution is available (then distance columns are left blank).
struct Oracle {
  std::optional<Vector> x_star;
  double min_inner = 0.0;
  double min_outer_on_argmin = 0.0;
  /// False when min_inner / min_outer_on_argmin come from a reference run.
  bool inner_exact = true;
  bool outer_exact = true;
  std::optional<HolderData> holder;
  /// ||p*|| for some p* in -dH(x*) cap N_{argmin F}(x*).
  std::optional<double> multiplier_norm;
  /// Euclidean projection onto argmin F; empty when unavailable.
  std::function<Vector(const Vector&)> argmin_projector;
};

/// Joint proximal map (s, eps, v) -> prox_{s (fhat + eps hhat)}(v).
using JointProx = std::function<Vector(double, double, const Vector&)>;

/// min H = h + hhat over argmin F = f + fhat.
struct BilevelProblem {
  std::string id;
  Eigen::Index dimension = 0;
  CompositeObjective inner;
  CompositeObjective outer;
  std::optional<Oracle> oracle;
  JointProx joint_prox;

  double inner_value(const Vector& x) const { return inner.value(x); }
  double outer_value(const Vector& x) const { return outer.value(x); }

  const Oracle& require_oracle() const;
  const Vector& require_x_star() const;

  /// Checks the oracle invariants; throws ValidationError on failure.
  void validate() const;
};

/// F(x) + eps H(x); +inf propagates.
double regularized_value(const BilevelProblem& prob, double eps, const Vector& x);
/// grad f(x) + eps grad h(x).
Vector regularized_gradient(const BilevelProblem& prob, double eps, const Vector& x);

/// prox_{s (fhat + eps hhat)}(v). Supported when fhat == 0, hhat == 0 (or
/// eps == 0), a joint prox is supplied, or both parts are coordinate
/// separable; otherwise throws UnsupportedProxCombination.
Vector combined_prox(const ProxTerm& fhat, const ProxTerm& hhat, double s, double eps,
                     const Vector& v, const JointProx& joint = {});

}  // namespace bilevel
