#include "bilevel/algorithms.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include "bilevel/diagnostics.hpp"

namespace bilevel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double inverse_or_inf(double v) { return v > 0.0 ? 1.0 / v : kInfinity; }

Vector proximal_gradient(const BilevelProblem& prob, const SolverConfig& cfg, const Vector& at,
                         double step, double eps) {
  const Vector g = regularized_gradient(prob, eps, at);
  Vector v(at.size());
  kernels::gradient_step(cfg.backend, at, g, step, v);
  return combined_prox(prob.inner.nonsmooth, prob.outer.nonsmooth, step, eps, v, prob.joint_prox);
}

SolverState advance(SolverState state, Vector x_next) {
  state.x_prev = std::move(state.x_curr);
  state.x_curr = std::move(x_next);
  ++state.k;
  return state;
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::BPG: return "BPG";
    case Method::BFPG: return "BFPG";
    case Method::FBiPG: return "FBiPG";
    case Method::StaBiM: return "staBiM";
    case Method::BiSG2: return "BiSG2";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string lower;
  for (char ch : name) {
    if (ch != '-' && ch != '_') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (lower == "bpg") return Method::BPG;
  if (lower == "bfpg") return Method::BFPG;
  if (lower == "fbipg") return Method::FBiPG;
  if (lower == "stabim") return Method::StaBiM;
  if (lower == "bisg2" || lower == "bisgii") return Method::BiSG2;
  throw ValidationError("method", "unknown method '" + name + "'");
}

bool is_second_order(Method m) { return m == Method::BFPG || m == Method::FBiPG; }

double max_step(Method m, const BilevelProblem& prob) {
  const double inv = inverse_or_inf(prob.inner.smooth.lipschitz());
  return m == Method::BPG ? 2.0 * inv : inv;
}

double resolved_step(const SolverConfig& cfg, const BilevelProblem& prob) {
  if (cfg.step) return *cfg.step;
  const double limit = max_step(cfg.method, prob);
  if (std::isinf(limit)) throw ValidationError("step", "required when the inner smooth part is zero");
  return cfg.step_fraction * limit;
}

SolverConfig fbipg_as_bfpg(const SolverConfig& cfg) {
  SolverConfig out = cfg;
  out.method = Method::BFPG;
  out.gamma = cfg.alpha - 1.0;
  if (!out.schedule.vanishing_off) {
    out.schedule.c = 1.0;
    out.schedule.beta = cfg.alpha - 1.0;
  }
  return out;
}

void validate(const SolverConfig& cfg, const BilevelProblem& prob) {
  cfg.schedule.validate();
  if (cfg.max_iter < 0) throw ValidationError("max_iter", "must be >= 0");
  if (!(cfg.step_fraction > 0.0 && cfg.step_fraction < 1.0)) {
    throw ValidationError("step_fraction", "must lie in (0, 1)");
  }
  const double step = resolved_step(cfg, prob);
  const double limit = max_step(cfg.method, prob);
  if (!(step > 0.0)) throw ValidationError("step", "must be > 0");
  switch (cfg.method) {
    case Method::BPG:
      if (!(step < limit)) throw ValidationError("step", "BPG requires 0 < theta < 2/L_f");
      break;
    case Method::BFPG:
    case Method::FBiPG:
      if (!(cfg.alpha > 3.0)) throw ValidationError("alpha", "momentum methods require alpha > 3");
      if (!(cfg.gamma >= 0.0)) throw ValidationError("gamma", "must be >= 0");
      if (!(step < limit)) throw ValidationError("step", "BFPG requires 0 < s < 1/L_f");
      break;
    case Method::StaBiM:
      if (!(cfg.stabim_theta_tilde > 0.0 && cfg.stabim_theta_tilde < 1.0)) {
        throw ValidationError("stabim_theta_tilde", "must lie in (0, 1)");
      }
      if (!(cfg.stabim_eta0 > 0.0)) throw ValidationError("stabim_eta0", "must be > 0");
      if (!(cfg.stabim_eta_shrink >= 0.75 && cfg.stabim_eta_shrink <= 1.0)) {
        throw ValidationError("stabim_eta_shrink", "must lie in [0.75, 1]");
      }
      if (prob.inner.smooth.lipschitz() <= 0.0 && prob.outer.smooth.lipschitz() <= 0.0) {
        throw ValidationError("method", "staBiM needs a positive L_f or L_h");
      }
      break;
    case Method::BiSG2:
      if (!(step <= limit)) throw ValidationError("step", "Bi-SG-II requires theta <= 1/L_f");
      if (!cfg.schedule.vanishing_off) {
        if (!(cfg.schedule.delta > 0.5 && cfg.schedule.delta <= 1.0)) {
          throw ValidationError("schedule.delta", "Bi-SG-II requires delta in (1/2, 1]");
        }
        const double c_max = std::min(inverse_or_inf(prob.outer.smooth.lipschitz()), 1.0);
        if (!(cfg.schedule.c <= c_max)) {
          throw ValidationError("schedule.c", "Bi-SG-II requires c <= min{1/L_h, 1}");
        }
      }
      break;
  }
}

SolverState initial_state(const BilevelProblem& prob, const SolverConfig& cfg, const Vector& x0) {
  if (x0.size() != prob.dimension) throw ValidationError("x0", "dimension mismatch");
  SolverState state;
  state.x_curr = x0;
  state.x_prev = x0;
  state.k = is_second_order(cfg.method) ? 1 : 0;
  if (cfg.method == Method::StaBiM) {
    state.stabim_eta = cfg.stabim_eta0;
    state.theta_k = cfg.stabim_theta_tilde /
                    (cfg.stabim_eta0 * prob.outer.smooth.lipschitz() + prob.inner.smooth.lipschitz());
  }
  return state;
}

double method_epsilon(const SolverConfig& cfg, long long k) {
  switch (cfg.method) {
    case Method::FBiPG: return epsilon_discrete(fbipg_as_bfpg(cfg).schedule, k);
    case Method::BiSG2: {
      Schedule s = cfg.schedule;
      s.beta = 1.0;
      return epsilon_discrete(s, k);
    }
    default: return epsilon_discrete(cfg.schedule, k);
  }
}

double momentum_coefficient(double alpha, double gamma, long long k) {
  return 1.0 - alpha / (static_cast<double>(k) + gamma + 1.0);
}

SolverState step_bpg(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state) {
  const double theta = resolved_step(cfg, prob);
  const double eps = epsilon_discrete(cfg.schedule, state.k);
  Vector next = proximal_gradient(prob, cfg, state.x_curr, theta, eps);
  return advance(std::move(state), std::move(next));
}

SolverState step_bfpg(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state) {
  const double s = resolved_step(cfg, prob);
  const double eps = epsilon_discrete(cfg.schedule, state.k);
  const double a_k = momentum_coefficient(cfg.alpha, cfg.gamma, state.k);
  state.y.resize(state.x_curr.size());
  kernels::extrapolate(cfg.backend, state.x_curr, state.x_prev, a_k, state.y);
  Vector next = proximal_gradient(prob, cfg, state.y, s, eps);
  return advance(std::move(state), std::move(next));
}

SolverState step_fbipg(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state) {
  return step_bfpg(prob, fbipg_as_bfpg(cfg), std::move(state));
}

SolverState step_stabim(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state) {
  const double eps = epsilon_discrete(cfg.schedule, state.k);
  state.stabim_eta *= cfg.stabim_eta_shrink;
  state.theta_k = cfg.stabim_theta_tilde /
                  (state.stabim_eta * prob.outer.smooth.lipschitz() + prob.inner.smooth.lipschitz());
  Vector next = proximal_gradient(prob, cfg, state.x_curr, state.theta_k, eps);
  return advance(std::move(state), std::move(next));
}

SolverState step_bisg2(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state) {
  const double theta = resolved_step(cfg, prob);
  const double eps = method_epsilon(cfg, state.k);
  Vector v(state.x_curr.size());
  kernels::gradient_step(cfg.backend, state.x_curr, prob.inner.smooth.grad(state.x_curr), theta, v);
  state.y = prob.inner.nonsmooth.prox(theta, v);
  Vector next = state.y;
  if (eps > 0.0) {
    if (!prob.outer.smooth.is_zero()) {
      kernels::gradient_step(cfg.backend, state.y, prob.outer.smooth.grad(state.y), theta * eps, next);
    }
    if (!prob.outer.nonsmooth.is_zero()) next = prob.outer.nonsmooth.prox(theta * eps, next);
  }
  return advance(std::move(state), std::move(next));
}

SolverState step(const BilevelProblem& prob, const SolverConfig& cfg, SolverState state) {
  switch (cfg.method) {
    case Method::BPG: return step_bpg(prob, cfg, std::move(state));
    case Method::BFPG: return step_bfpg(prob, cfg, std::move(state));
    case Method::FBiPG: return step_fbipg(prob, cfg, std::move(state));
    case Method::StaBiM: return step_stabim(prob, cfg, std::move(state));
    case Method::BiSG2: return step_bisg2(prob, cfg, std::move(state));
  }
  return state;
}

RunTrace run(const BilevelProblem& prob, const SolverConfig& cfg, const Vector& x0,
             const Observer& observer, const RunOptions& options) {
  validate(cfg, prob);
  if (options.record_every < 1) throw ValidationError("record_every", "must be >= 1");
  const auto started = std::chrono::steady_clock::now();

  RunTrace trace;
  trace.problem_id = prob.id;
  trace.method = method_name(cfg.method);
  trace.storage = options.store_iterates ? choose_storage(prob.dimension, cfg.max_iter)
                                         : StoragePolicy::None;
  trace.thin_stride = trace.storage == StoragePolicy::Thinned ? 10 : 1;

  const Oracle* oracle = prob.oracle ? &*prob.oracle : nullptr;
  const Vector* x_star = oracle && oracle->x_star ? &*oracle->x_star : nullptr;

  // Energies follow the method's own schedule and step.
  std::optional<Order> energy_order;
  LyapunovParams lp;
  Schedule energy_sched = cfg.schedule;
  if (options.compute_energy && x_star) {
    if (cfg.method == Method::BPG) {
      energy_order = Order::First;
      lp.theta = resolved_step(cfg, prob);
      lp.gamma = cfg.gamma;
      lp.lambda = options.lyapunov_lambda.value_or(default_lambda(Order::First, cfg.alpha));
    } else if (is_second_order(cfg.method)) {
      const SolverConfig eff = cfg.method == Method::FBiPG ? fbipg_as_bfpg(cfg) : cfg;
      energy_order = Order::Second;
      energy_sched = eff.schedule;
      lp.theta = std::sqrt(resolved_step(cfg, prob));
      lp.gamma = eff.gamma;
      lp.alpha = eff.alpha;
      lp.lambda = options.lyapunov_lambda.value_or(default_lambda(Order::Second, cfg.alpha));
    }
  }

  auto record = [&](long long k, const Vector& x, const Vector& x_prev) {
    const bool keep = k % options.record_every == 0 || k == cfg.max_iter;
    if (trace.storage == StoragePolicy::Full ||
        (trace.storage == StoragePolicy::Thinned && (k % trace.thin_stride == 0 || k == cfg.max_iter))) {
      if (trace.iterate_index.empty() || trace.iterate_index.back() != k) {
        trace.iterate_index.push_back(k);
        trace.iterates.push_back(x);
      }
    }
    if (!keep) return;
    TraceRecord r;
    r.k = k;
    r.F_value = prob.inner_value(x);
    r.H_value = prob.outer_value(x);
    r.F_res = oracle ? r.F_value - oracle->min_inner : kNaN;
    r.H_gap = oracle ? r.H_value - oracle->min_outer_on_argmin : kNaN;
    r.dist = x_star ? (x - *x_star).norm() : kNaN;
    r.eps = method_epsilon(cfg, k);
    r.step_norm = (x - x_prev).norm();
    if (energy_order && k >= 1) {
      r.E_lambda = *energy_order == Order::First
                       ? lyapunov_first(prob, energy_sched, lp, k, x)
                       : lyapunov_second(prob, energy_sched, lp, k, x, x_prev);
    }
    if (!trace.records.empty() && trace.records.back().k == k) return;
    trace.records.push_back(r);
  };

  SolverState state = initial_state(prob, cfg, x0);
  record(0, x0, x0);
  if (observer) observer({0, x0, x0, method_epsilon(cfg, 0)});
  if (state.k == 1 && cfg.max_iter >= 1) {
    record(1, state.x_curr, state.x_prev);
    if (observer) observer({1, state.x_curr, state.x_prev, method_epsilon(cfg, 1)});
  }

  while (state.k < cfg.max_iter) {
    try {
      state = step(prob, cfg, std::move(state));
    } catch (const Error& e) {
      trace.failed = true;
      trace.error = "step " + std::to_string(state.k) + ": " + e.what();
      break;
    }
    if (!state.x_curr.allFinite()) {
      trace.failed = true;
      trace.error = "iterate became non-finite at k=" + std::to_string(state.k);
      break;
    }
    record(state.k, state.x_curr, state.x_prev);
    if (observer) observer({state.k, state.x_curr, state.x_prev, method_epsilon(cfg, state.k)});
  }

  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trace;
}

}  // namespace bilevel
