#include "bilevel/flows.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace bilevel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Schedule flow_schedule(const FlowConfig& cfg) {
  Schedule s = cfg.sched;
  s.t0 = cfg.t0;
  return s;
}

Vector drift(const BilevelProblem& prob, const Schedule& sched, double t, const Vector& x) {
  return -regularized_gradient(prob, epsilon_continuous(sched, t), x);
}

void require_smooth(const BilevelProblem& prob) {
  if (!prob.inner.nonsmooth.is_zero() || !prob.outer.nonsmooth.is_zero()) {
    throw NonSmoothProblem("flows need f^ = h^ = 0; problem '" + prob.id + "' has a nonsmooth part");
  }
}

double lambda_for(const FlowConfig& cfg) {
  return cfg.lambda.value_or(default_lambda(cfg.order, cfg.alpha));
}

FlowRecord make_record(const BilevelProblem& prob, const FlowConfig& cfg, const Schedule& sched,
                       double t, const Vector& x, const Vector& v) {
  const Oracle* o = prob.oracle ? &*prob.oracle : nullptr;
  FlowRecord r;
  r.t = t;
  r.F_value = prob.inner_value(x);
  r.H_value = prob.outer_value(x);
  r.F_res = o ? r.F_value - o->min_inner : kNaN;
  r.H_gap = o ? r.H_value - o->min_outer_on_argmin : kNaN;
  r.dist = o && o->x_star ? (x - *o->x_star).norm() : kNaN;
  r.eps = epsilon_continuous(sched, t);
  r.step_norm = v.norm();
  if (o && o->x_star) r.E_lambda = continuous_energy(prob, cfg, lambda_for(cfg), t, x, v);
  return r;
}

}  // namespace

double FlowConfig::max_dt(const BilevelProblem& prob) const {
  const double eps0 = sched.vanishing_off ? 0.0 : sched.c / std::pow(t0, sched.delta);
  const double stiffness = prob.inner.smooth.lipschitz() + eps0 * prob.outer.smooth.lipschitz();
  return stiffness > 0.0 ? std::min(0.1, 1.0 / (10.0 * stiffness)) : 0.1;
}

void FlowConfig::validate(const BilevelProblem& prob) const {
  flow_schedule(*this).validate();
  if (!(t0 > 0.0)) throw ValidationError("t0", "must be > 0");
  if (!(t_end > t0)) throw ValidationError("t_end", "must exceed t0");
  if (!(dt > 0.0)) throw ValidationError("dt", "must be > 0");
  if (!(dt <= max_dt(prob))) {
    throw ValidationError("dt", "must be <= min(0.1, 1/(10 (L_f + eps(t0) L_h))) = " +
                                    std::to_string(max_dt(prob)));
  }
  if (order == Order::Second && !(alpha > 3.0)) {
    throw ValidationError("alpha", "second-order flow requires alpha > 3");
  }
  if (x0.size() != prob.dimension) throw ValidationError("x0", "dimension mismatch");
  if (v0 && v0->size() != prob.dimension) throw ValidationError("v0", "dimension mismatch");
  if (samples_per_decade < 1) throw ValidationError("samples_per_decade", "must be >= 1");
}

std::vector<double> log_time_grid(double t0, double t_end, int per_decade) {
  std::vector<double> grid{t0};
  for (int j = 1;; ++j) {
    const double t = t0 * std::pow(10.0, static_cast<double>(j) / per_decade);
    if (t >= t_end * (1.0 - 1e-12)) break;
    grid.push_back(t);
  }
  grid.push_back(t_end);
  return grid;
}

FlowTrace integrate_first_flow(const BilevelProblem& prob, const FlowConfig& cfg) {
  require_smooth(prob);
  cfg.validate(prob);
  const auto started = std::chrono::steady_clock::now();
  const Schedule sched = flow_schedule(cfg);
  FlowTrace trace;
  trace.problem_id = prob.id;
  trace.order = Order::First;

  const std::vector<double> grid = log_time_grid(cfg.t0, cfg.t_end, cfg.samples_per_decade);
  Vector x = cfg.x0;
  auto emit = [&](double t) {
    const Vector v = drift(prob, sched, t, x);
    trace.records.push_back(make_record(prob, cfg, sched, t, x, v));
    trace.positions.push_back(x);
    trace.velocities.push_back(v);
  };
  emit(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid[i - 1], gap = grid[i] - a;
    const auto n = static_cast<long long>(std::ceil(gap / cfg.dt - 1e-9));
    const double h = gap / static_cast<double>(n);
    for (long long s = 0; s < n; ++s) {
      const double t = a + static_cast<double>(s) * h;
      const Vector k1 = drift(prob, sched, t, x);
      const Vector k2 = drift(prob, sched, t + 0.5 * h, x + 0.5 * h * k1);
      const Vector k3 = drift(prob, sched, t + 0.5 * h, x + 0.5 * h * k2);
      const Vector k4 = drift(prob, sched, t + h, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    trace.steps += n;
    emit(grid[i]);
  }
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trace;
}

FlowTrace integrate_second_flow(const BilevelProblem& prob, const FlowConfig& cfg) {
  require_smooth(prob);
  cfg.validate(prob);
  if (cfg.order != Order::Second) throw ValidationError("order", "expected a second-order config");
  const auto started = std::chrono::steady_clock::now();
  const Schedule sched = flow_schedule(cfg);
  FlowTrace trace;
  trace.problem_id = prob.id;
  trace.order = Order::Second;

  auto accel = [&](double t, const Vector& x, const Vector& v) {
    return Vector(drift(prob, sched, t, x) - (cfg.alpha / t) * v);
  };

  const std::vector<double> grid = log_time_grid(cfg.t0, cfg.t_end, cfg.samples_per_decade);
  Vector x = cfg.x0;
  Vector v = cfg.v0.value_or(Vector::Zero(prob.dimension));
  auto emit = [&](double t) {
    trace.records.push_back(make_record(prob, cfg, sched, t, x, v));
    trace.positions.push_back(x);
    trace.velocities.push_back(v);
  };
  emit(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid[i - 1], gap = grid[i] - a;
    const auto n = static_cast<long long>(std::ceil(gap / cfg.dt - 1e-9));
    const double h = gap / static_cast<double>(n);
    for (long long s = 0; s < n; ++s) {
      const double t = a + static_cast<double>(s) * h;
      const Vector& kx1 = v;
      const Vector kv1 = accel(t, x, v);
      const Vector kx2 = v + 0.5 * h * kv1;
      const Vector kv2 = accel(t + 0.5 * h, x + 0.5 * h * kx1, kx2);
      const Vector kx3 = v + 0.5 * h * kv2;
      const Vector kv3 = accel(t + 0.5 * h, x + 0.5 * h * kx2, kx3);
      const Vector kx4 = v + h * kv3;
      const Vector kv4 = accel(t + h, x + h * kx3, kx4);
      x += (h / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
      v += (h / 6.0) * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    }
    trace.steps += n;
    emit(grid[i]);
  }
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trace;
}

FlowTrace integrate_flow(const BilevelProblem& prob, const FlowConfig& cfg) {
  return cfg.order == Order::First ? integrate_first_flow(prob, cfg)
                                   : integrate_second_flow(prob, cfg);
}

double continuous_energy(const BilevelProblem& prob, const FlowConfig& cfg, double lambda, double t,
                         const Vector& x, const Vector& velocity) {
  const Vector& xs = prob.require_x_star();
  const double eps = epsilon_continuous(flow_schedule(cfg), t);
  const double gap = regularized_value(prob, eps, x) - regularized_value(prob, eps, xs);
  if (cfg.order == Order::First) return t * gap + 0.5 * lambda * (x - xs).squaredNorm();
  const Vector anchor = lambda * (x - xs) + t * velocity;
  return t * t * gap + 0.5 * anchor.squaredNorm() +
         0.5 * lambda * (cfg.alpha - 1.0 - lambda) * (x - xs).squaredNorm();
}

LyapunovSeries continuous_lyapunov(const BilevelProblem& prob, const FlowConfig& cfg,
                                   const FlowTrace& trace, double lambda) {
  const Vector& xs = prob.require_x_star();
  if (cfg.order == Order::First) {
    if (!(lambda > 1.0)) throw ValidationError("lambda", "first-order energy requires lambda > 1");
  } else if (!(lambda > 2.0 && lambda < cfg.alpha - 1.0)) {
    throw ValidationError("lambda", "second-order energy requires lambda in (2, alpha - 1)");
  }
  const Schedule sched = flow_schedule(cfg);
  const double f_star = prob.inner.smooth.eval(xs);
  const double h_star = prob.outer.smooth.eval(xs);
  const std::size_t n = trace.records.size();
  LyapunovSeries out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = trace.records[i].t;
    out.t.push_back(t);
    out.energy.push_back(
        continuous_energy(prob, cfg, lambda, t, trace.positions[i], trace.velocities[i]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    double rate = 0.0;
    if (n >= 2) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
      if (lo == i || hi == i) {
        rate = (out.energy[hi] - out.energy[lo]) / (out.t[hi] - out.t[lo]);
      } else {
        // Three-point derivative on a nonuniform grid.
        const double h1 = out.t[i] - out.t[lo], h2 = out.t[hi] - out.t[i];
        rate = (-h2 / (h1 * (h1 + h2))) * out.energy[lo] +
               ((h2 - h1) / (h1 * h2)) * out.energy[i] + (h1 / (h2 * (h1 + h2))) * out.energy[hi];
      }
    }
    out.energy_rate.push_back(rate);
    const double t = out.t[i];
    const double eps = epsilon_continuous(sched, t);
    const double eps_rate = epsilon_continuous_rate(sched, t);
    const Vector& x = trace.positions[i];
    const double f_gap = prob.inner.smooth.eval(x) - f_star;
    const double h_gap = prob.outer.smooth.eval(x) - h_star;
    double z = 0.0, lhs = 0.0, rhs = 0.0;
    if (cfg.order == Order::First) {
      z = (lambda - 1.0) * eps - t * eps_rate;
      lhs = rate + z * h_gap;
      rhs = -(lambda - 1.0) * f_gap;
    } else {
      z = t * (lambda - 2.0) * eps - t * t * eps_rate;
      lhs = rate + z * h_gap + (cfg.alpha - 1.0 - lambda) * t * trace.velocities[i].squaredNorm();
      rhs = -t * (lambda - 2.0) * f_gap;
    }
    out.zeta.push_back(z);
    out.slack.push_back(rhs - lhs);
    out.tolerance.push_back(1e-6 * (1.0 + std::abs(out.energy[i])));
  }
  return out;
}

}  // namespace bilevel
