#include "bilevel/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace bilevel {

void Schedule::validate() const {
  if (vanishing_off) return;
  if (!(c > 0.0)) throw ValidationError("schedule.c", "must be > 0");
  if (!(delta > 0.0)) throw ValidationError("schedule.delta", "must be > 0");
  if (!(beta > 0.0)) throw ValidationError("schedule.beta", "must be > 0");
  if (!(t0 > 0.0)) throw ValidationError("schedule.t0", "must be > 0");
}

double epsilon_discrete(const Schedule& sched, long long k) {
  if (sched.vanishing_off) return 0.0;
  if (k < 0) throw ValidationError("k", "iteration index must be >= 0");
  return sched.c / std::pow(static_cast<double>(k) + sched.beta, sched.delta);
}

double epsilon_continuous(const Schedule& sched, double t) {
  if (!(t >= sched.t0)) throw ValidationError("t", "time precedes t0");
  if (sched.vanishing_off) return 0.0;
  return sched.c / std::pow(t, sched.delta);
}

double epsilon_continuous_rate(const Schedule& sched, double t) {
  if (!(t >= sched.t0)) throw ValidationError("t", "time precedes t0");
  if (sched.vanishing_off) return 0.0;
  return -sched.delta * sched.c / std::pow(t, sched.delta + 1.0);
}

SmoothTerm::SmoothTerm(EvalFn eval, GradFn grad, double lipschitz, std::string name)
    : eval_(std::move(eval)),
      grad_(std::move(grad)),
      lipschitz_(lipschitz),
      is_zero_(false),
      name_(std::move(name)) {
  if (!(lipschitz > 0.0)) throw ValidationError("lipschitz", "must be > 0");
}

SmoothTerm SmoothTerm::zero() { return SmoothTerm(); }

SmoothTerm SmoothTerm::squared_norm(double weight) {
  return SmoothTerm([weight](const Vector& x) { return 0.5 * weight * x.squaredNorm(); },
                    [weight](const Vector& x) { return Vector(weight * x); }, weight,
                    "squared_norm");
}

double CompositeObjective::value(const Vector& x) const {
  const double ns = nonsmooth.eval(x);
  if (std::isinf(ns)) return ns;
  return smooth.eval(x) + ns;
}

const Oracle& BilevelProblem::require_oracle() const {
  if (!oracle) throw MissingOracle("problem '" + id + "' has no oracle data");
  return *oracle;
}

const Vector& BilevelProblem::require_x_star() const {
  const Oracle& o = require_oracle();
  if (!o.x_star) throw MissingOracle("problem '" + id + "' has no known solution x*");
  return *o.x_star;
}

void BilevelProblem::validate() const {
  if (dimension <= 0) throw ValidationError("dimension", "must be positive");
  if (!oracle) return;
  if (oracle->x_star) {
    if (oracle->x_star->size() != dimension) {
      throw ValidationError("oracle.x_star", "dimension mismatch");
    }
    const double value = inner_value(*oracle->x_star);
    const double scale = std::max(1.0, std::abs(oracle->min_inner));
    if (oracle->inner_exact && std::abs(value - oracle->min_inner) > 1e-10 * scale) {
      throw ValidationError("oracle.min_inner", "F(x*) does not match min_inner");
    }
  }
  if (oracle->holder) {
    if (!(oracle->holder->rho > 1.0 && oracle->holder->rho <= 2.0)) {
      throw ValidationError("oracle.holder.rho", "must lie in (1, 2]");
    }
    if (!(oracle->holder->tau > 0.0)) throw ValidationError("oracle.holder.tau", "must be > 0");
  }
}

double regularized_value(const BilevelProblem& prob, double eps, const Vector& x) {
  const double inner = prob.inner_value(x);
  if (eps == 0.0 || std::isinf(inner)) return inner;
  return inner + eps * prob.outer_value(x);
}

Vector regularized_gradient(const BilevelProblem& prob, double eps, const Vector& x) {
  Vector g = prob.inner.smooth.grad(x);
  if (eps != 0.0 && !prob.outer.smooth.is_zero()) g += eps * prob.outer.smooth.grad(x);
  return g;
}

Vector combined_prox(const ProxTerm& fhat, const ProxTerm& hhat, double s, double eps,
                     const Vector& v, const JointProx& joint) {
  if (!(s > 0.0)) throw ValidationError("s", "prox modulus must be > 0");
  if (!(eps >= 0.0)) throw ValidationError("eps", "must be >= 0");
  const bool outer_active = !hhat.is_zero() && eps > 0.0;
  if (fhat.is_zero()) return outer_active ? hhat.prox(s * eps, v) : Vector(v);
  if (!outer_active) return fhat.prox(s, v);
  if (joint) return joint(s, eps, v);
  if (fhat.separable() && hhat.separable()) {
    return fhat.separable()->combined_with(*hhat.separable(), eps).prox(s, v);
  }
  throw UnsupportedProxCombination("no closed form for prox of " + fhat.name() + " + eps * " +
                                   hhat.name() + "; register a joint prox");
}

}  // namespace bilevel
