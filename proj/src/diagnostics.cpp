#include "bilevel/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bilevel/algorithms.hpp"

namespace bilevel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double psi(const BilevelProblem& prob, const Schedule& sched, long long k, const Vector& x) {
  return regularized_value(prob, epsilon_discrete(sched, k), x);
}

void require_k(long long k) {
  if (k < 1) throw ValidationError("k", "energies are defined for k >= 1");
}

void finish_report(DissipationReport& rep) {
  rep.k0 = -1;
  rep.violations = 0;
  rep.worst_slack = kInfinity;
  for (std::size_t i = 0; i < rep.slack.size(); ++i) {
    rep.worst_slack = std::min(rep.worst_slack, rep.slack[i]);
    if (rep.slack[i] < -rep.tolerance[i]) ++rep.violations;
  }
  for (std::size_t i = rep.slack.size(); i-- > 0;) {
    if (rep.slack[i] < -rep.tolerance[i]) break;
    rep.k0 = rep.k[i];
  }
}

}  // namespace

void LyapunovParams::validate(Order order) const {
  if (!(theta > 0.0)) throw ValidationError("theta", "must be > 0");
  if (!(gamma >= 0.0)) throw ValidationError("gamma", "must be >= 0");
  if (order == Order::First) {
    if (!(lambda > 1.0)) throw ValidationError("lambda", "first-order energy requires lambda > 1");
  } else if (!(lambda > 2.0 && lambda < alpha - 1.0)) {
    throw ValidationError("lambda", "second-order energy requires lambda in (2, alpha - 1)");
  }
}

double default_lambda(Order order, double alpha) {
  return order == Order::First ? 2.0 : (alpha + 1.0) / 2.0;
}

double lyapunov_first(const BilevelProblem& prob, const Schedule& sched,
                      const LyapunovParams& params, long long k, const Vector& x_k) {
  const Vector& xs = prob.require_x_star();
  require_k(k);
  const double gap = psi(prob, sched, k - 1, x_k) - psi(prob, sched, k - 1, xs);
  return params.t(k) * gap + 0.5 * params.lambda * (x_k - xs).squaredNorm();
}

double lyapunov_second(const BilevelProblem& prob, const Schedule& sched,
                       const LyapunovParams& params, long long k, const Vector& x_k,
                       const Vector& x_km1) {
  const Vector& xs = prob.require_x_star();
  require_k(k);
  const double t = params.t(k);
  const double gap = psi(prob, sched, k - 1, x_k) - psi(prob, sched, k - 1, xs);
  const Vector anchor = params.lambda * (x_km1 - xs) + (t / params.theta) * (x_k - x_km1);
  return t * t * gap + 0.5 * anchor.squaredNorm() +
         0.5 * params.lambda * (params.alpha - 1.0 - params.lambda) * (x_km1 - xs).squaredNorm();
}

double zeta_first(const Schedule& sched, const LyapunovParams& params, long long k) {
  require_k(k);
  const double e = epsilon_discrete(sched, k);
  const double e_prev = epsilon_discrete(sched, k - 1);
  return params.theta * (params.lambda - 1.0) * e - params.t(k) * (e - e_prev);
}

double zeta_second(const Schedule& sched, const LyapunovParams& params, long long k) {
  require_k(k);
  const double e = epsilon_discrete(sched, k);
  const double e_prev = epsilon_discrete(sched, k - 1);
  const double t = params.t(k);
  return params.theta * ((params.lambda - 2.0) * t + params.theta * (params.lambda - 1.0)) * e -
         t * t * (e - e_prev);
}

double zeta(Order order, const Schedule& sched, const LyapunovParams& params, long long k) {
  return order == Order::First ? zeta_first(sched, params, k) : zeta_second(sched, params, k);
}

DissipationReport check_dissipation_first(const BilevelProblem& prob, const Schedule& sched,
                                          const LyapunovParams& params, const RunTrace& trace) {
  const Vector& xs = prob.require_x_star();
  trace.require_full_storage("check_dissipation_first");
  const double f_star = prob.inner_value(xs);
  const double h_star = prob.outer_value(xs);
  DissipationReport rep;
  const long long last = trace.last_iterate_index();
  if (last < 2) return rep;
  double e_k = lyapunov_first(prob, sched, params, 1, trace.iterate(1));
  for (long long k = 1; k < last; ++k) {
    const Vector& x_k = trace.iterate(k);
    const double e_next = lyapunov_first(prob, sched, params, k + 1, trace.iterate(k + 1));
    const double lhs = e_next - e_k + zeta_first(sched, params, k) * (prob.outer_value(x_k) - h_star);
    const double rhs = -params.theta * (params.lambda - 1.0) * (prob.inner_value(x_k) - f_star);
    rep.k.push_back(k);
    rep.slack.push_back(rhs - lhs);
    rep.tolerance.push_back(1e-9 * (1.0 + std::abs(e_k)));
    rep.energy.push_back(e_k);
    e_k = e_next;
  }
  finish_report(rep);
  return rep;
}

DissipationReport check_dissipation_second(const BilevelProblem& prob, const Schedule& sched,
                                           const LyapunovParams& params, const RunTrace& trace) {
  const Vector& xs = prob.require_x_star();
  trace.require_full_storage("check_dissipation_second");
  const double f_star = prob.inner_value(xs);
  const double h_star = prob.outer_value(xs);
  DissipationReport rep;
  const long long last = trace.last_iterate_index();
  if (last < 2) return rep;
  double e_k = lyapunov_second(prob, sched, params, 1, trace.iterate(1), trace.iterate(0));
  for (long long k = 1; k < last; ++k) {
    const Vector& x_km1 = trace.iterate(k - 1);
    const Vector& x_k = trace.iterate(k);
    const double e_next =
        lyapunov_second(prob, sched, params, k + 1, trace.iterate(k + 1), x_k);
    const double a_k = momentum_coefficient(params.alpha, params.gamma, k);
    const double velocity = (params.alpha - 1.0 - params.lambda) * params.theta * params.t(k + 1) *
                            a_k * ((x_k - x_km1) / params.theta).squaredNorm();
    const double lhs = e_next - e_k + velocity +
                       zeta_second(sched, params, k) * (prob.outer_value(x_k) - h_star);
    const double rhs = -params.theta * params.theta * (params.lambda - 2.0) *
                       static_cast<double>(k) * (prob.inner_value(x_k) - f_star);
    rep.k.push_back(k);
    rep.slack.push_back(rhs - lhs);
    rep.tolerance.push_back(1e-9 * (1.0 + std::abs(e_k)));
    rep.energy.push_back(e_k);
    e_k = e_next;
  }
  finish_report(rep);
  return rep;
}

const char* trace_field_name(TraceField f) {
  switch (f) {
    case TraceField::F_res: return "F_res";
    case TraceField::H_gap: return "H_gap";
    case TraceField::AbsH_gap: return "abs_H_gap";
    case TraceField::Dist: return "dist";
    case TraceField::Eps: return "eps";
    case TraceField::StepNorm: return "step_norm";
    case TraceField::E_lambda: return "E_lambda";
  }
  return "?";
}

TraceField parse_trace_field(const std::string& name) {
  for (TraceField f : {TraceField::F_res, TraceField::H_gap, TraceField::AbsH_gap, TraceField::Dist,
                       TraceField::Eps, TraceField::StepNorm, TraceField::E_lambda}) {
    if (name == trace_field_name(f)) return f;
  }
  throw ValidationError("field", "unknown trace field '" + name + "'");
}

double field_value(const TraceRecord& r, TraceField f) {
  switch (f) {
    case TraceField::F_res: return r.F_res;
    case TraceField::H_gap: return r.H_gap;
    case TraceField::AbsH_gap: return std::abs(r.H_gap);
    case TraceField::Dist: return r.dist;
    case TraceField::Eps: return r.eps;
    case TraceField::StepNorm: return r.step_norm;
    case TraceField::E_lambda: return r.E_lambda.value_or(kNaN);
  }
  return kNaN;
}

RateFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("fit", "length mismatch");
  if (x.size() < 2) throw ValidationError("window", "need at least two points to fit a rate");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw NonPositiveValues("log-log fit needs positive values (point " + std::to_string(i) + ")");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("window", "abscissae are all equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points = x.size();
  return fit;
}

RateFit fit_rate(const RunTrace& trace, TraceField field, std::pair<long long, long long> window) {
  std::vector<double> ks, vs;
  for (const auto& r : trace.records) {
    if (r.k < window.first || r.k > window.second || r.k <= 0) continue;
    const double v = field_value(r, field);
    if (!(v > 0.0)) {
      throw NonPositiveValues(std::string(trace_field_name(field)) + " is not positive at k=" +
                              std::to_string(r.k));
    }
    ks.push_back(static_cast<double>(r.k));
    vs.push_back(v);
  }
  return fit_loglog(ks, vs);
}

Vector weighted_average(const std::vector<Vector>& xs, const std::vector<double>& weights) {
  if (xs.empty() || xs.size() != weights.size()) {
    throw ValidationError("weights", "need one weight per point");
  }
  double total = 0.0;
  Vector acc = Vector::Zero(xs.front().size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw ValidationError("weights", "must be nonnegative");
    acc += weights[i] * xs[i];
    total += weights[i];
  }
  if (!(total > 0.0)) throw ValidationError("weights", "must have a positive sum");
  return acc / total;
}

BestIterate best_iterate(const BilevelProblem& prob, const RunTrace& trace, const Schedule& sched,
                         const LyapunovParams& params, Order order, long long k, long long k0) {
  trace.require_full_storage("best_iterate");
  if (k0 < 1 || k < k0) throw ValidationError("k", "need 1 <= k0 <= k");
  if (!trace.has_iterate(k + 1)) throw StorageUnavailable("iterate k+1 not in trace");
  std::vector<Vector> xs;
  std::vector<double> ws;
  for (long long l = k0; l <= k; ++l) {
    xs.push_back(trace.iterate(l));
    ws.push_back(zeta(order, sched, params, l));
  }
  BestIterate out;
  out.x_bar = weighted_average(xs, ws);
  const Vector& last = trace.iterate(k + 1);
  if (prob.outer_value(out.x_bar) <= prob.outer_value(last)) {
    out.x_best = out.x_bar;
    out.which = "average";
  } else {
    out.x_best = last;
    out.which = "last";
  }
  return out;
}

HolderReport check_holder_growth(const BilevelProblem& prob, const std::vector<Vector>& samples) {
  const Oracle& o = prob.require_oracle();
  if (!o.holder) throw MissingOracle("problem '" + prob.id + "' has no Holder data");
  if (!o.argmin_projector) throw MissingOracle("problem '" + prob.id + "' has no argmin projector");
  const double rho = o.holder->rho;
  const double scale = o.holder->tau / rho;
  HolderReport rep;
  const bool with_bound = o.multiplier_norm.has_value() && o.x_star.has_value();
  rep.bound_checked = with_bound;
  const double h_star = with_bound ? prob.outer_value(*o.x_star) : 0.0;
  for (const Vector& x : samples) {
    const double residual = prob.inner_value(x) - o.min_inner;
    const double d = (x - o.argmin_projector(x)).norm();
    if (with_bound) {
      const double lhs = h_star - prob.outer_value(x);
      const double rhs = *o.multiplier_norm * std::pow(std::max(residual, 0.0) / scale, 1.0 / rho);
      rep.worst_bound_slack = std::min(rep.worst_bound_slack, rhs - lhs);
      if (rhs - lhs < -1e-9 * (1.0 + std::abs(h_star))) rep.bound_holds = false;
    }
    if (d == 0.0) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    rep.worst_ratio = std::min(rep.worst_ratio, residual / (scale * std::pow(d, rho)));
  }
  rep.passed = rep.worst_ratio >= 1.0 - 1e-9;
  return rep;
}

std::pair<double, double> sum_power_bounds(double r, long long k0, long long k) {
  if (!(r >= 0.0)) throw ValidationError("r", "must be >= 0");
  if (k0 < 1 || k < k0) throw ValidationError("k", "need 1 <= k0 <= k");
  const double a = static_cast<double>(k0), b = static_cast<double>(k);
  if (r == 1.0) return {std::log(b + 1.0) - std::log(a), std::log(b) - std::log(a - 1.0)};
  const double e = 1.0 - r;
  return {(std::pow(b + 1.0, e) - std::pow(a, e)) / e, (std::pow(b, e) - std::pow(a - 1.0, e)) / e};
}

ZetaSandwich zeta_sandwich(Order order, const Schedule& sched, const LyapunovParams& params,
                           long long k_lo, long long k_hi) {
  if (k_lo < 1 || k_hi < k_lo) throw ValidationError("k", "need 1 <= k_lo <= k_hi");
  const double eta = order == Order::First ? 1.0 : 2.0;
  ZetaSandwich out;
  out.c1 = kInfinity;
  out.c2 = -kInfinity;
  for (long long k = k_lo; k <= k_hi; ++k) {
    const double z = zeta(order, sched, params, k);
    const double p = std::pow(static_cast<double>(k), eta - 1.0);
    out.c1 = std::min(out.c1, z / (p * epsilon_discrete(sched, k - 1)));
    out.c2 = std::max(out.c2, z / (p * epsilon_discrete(sched, k)));
  }
  out.holds = out.c1 > 0.0 && std::isfinite(out.c2);
  return out;
}

double tail_oscillation(const RunTrace& trace, long long k_lo, long long k_hi) {
  double lo = kInfinity, hi = -kInfinity;
  for (const auto& r : trace.records) {
    if (r.k < k_lo || r.k > k_hi || !r.E_lambda) continue;
    lo = std::min(lo, *r.E_lambda);
    hi = std::max(hi, *r.E_lambda);
  }
  if (lo > hi) throw ValidationError("window", "no energy values in window");
  return hi - lo;
}

}  // namespace bilevel
