#include <cmath>

#include "doctest.h"

#include "bilevel/algorithms.hpp"
#include "bilevel/diagnostics.hpp"
#include "bilevel/problems.hpp"
#include "bilevel/trace_io.hpp"
#include "support.hpp"

using namespace bilevel;

namespace {

Schedule unit_schedule(double delta = 1.0) {
  Schedule s;
  s.c = 1.0, s.beta = 1.0, s.delta = delta;
  return s;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

/// f = x'Qx/2 - q'x on R^2, h = ||x||^2 / 2.
BilevelProblem planar_quadratic(const Eigen::Matrix2d& Q, const Eigen::Vector2d& q) {
  BilevelProblem p;
  p.id = "planar_quadratic";
  p.dimension = 2;
  p.inner.smooth = SmoothTerm([Q, q](const Vector& x) { return 0.5 * x.dot(Q * x) - q.dot(x); },
                              [Q, q](const Vector& x) { return Vector(Q * x - q); },
                              Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(Q).eigenvalues().maxCoeff());
  p.outer.smooth = SmoothTerm::squared_norm();
  return p;
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (Method m : {Method::BPG, Method::BFPG, Method::FBiPG, Method::StaBiM, Method::BiSG2}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK(parse_method("bi-sg-ii") == Method::BiSG2);
  CHECK(parse_method("STABIM") == Method::StaBiM);
  CHECK_THROWS_AS(parse_method("newton"), ValidationError);
}

TEST_CASE("step_bpg examples") {
  const auto p = testing_support::scalar_quadratics();
  SolverConfig cfg;
  cfg.method = Method::BPG;
  cfg.step = 1.0;
  cfg.schedule = unit_schedule();
  auto st = step_bpg(p, cfg, initial_state(p, cfg, scalar(1.0)));
  CHECK(st.k == 1);
  CHECK(st.x_curr[0] == doctest::Approx(0.0));

  cfg.step = 0.5;
  cfg.schedule = Schedule::zero();
  st = step_bpg(p, cfg, initial_state(p, cfg, scalar(1.0)));
  CHECK(st.x_curr[0] == doctest::Approx(0.5));

  // x* = 0 is stationary for f = h = ||x||^2/2 with no nonsmooth parts.
  auto toy = testing_support::planar_toy();
  cfg.step = 0.7;
  cfg.schedule = unit_schedule();
  st = step_bpg(toy, cfg, initial_state(toy, cfg, Vector::Zero(2)));
  CHECK(st.x_curr.norm() == 0.0);
}

TEST_CASE("momentum coefficient and first BFPG extrapolation") {
  CHECK(momentum_coefficient(4.0, 0.0, 1) == doctest::Approx(-1.0));
  CHECK(momentum_coefficient(4.0, 20.0, 19) == doctest::Approx(0.9));
  const auto p = testing_support::scalar_quadratics();
  SolverConfig cfg;
  cfg.method = Method::BFPG;
  cfg.step = 0.5;
  const auto s0 = initial_state(p, cfg, scalar(3.0));
  CHECK(s0.k == 1);
  CHECK(s0.x_prev == s0.x_curr);
  const auto s1 = step_bfpg(p, cfg, s0);
  CHECK(s1.y[0] == 3.0);
  CHECK(s1.x_prev[0] == 3.0);
}

TEST_CASE("BFPG with a zero schedule is FISTA on F") {
  Eigen::Matrix2d Q;
  Q << 3.0, 1.0, 1.0, 0.5;
  const Eigen::Vector2d q(1.0, -2.0);
  const auto p = planar_quadratic(Q, q);
  SolverConfig cfg;
  cfg.method = Method::BFPG;
  cfg.alpha = 5.0;
  cfg.gamma = 2.0;
  cfg.schedule = Schedule::zero();
  cfg.max_iter = 100;
  Vector x0(2);
  x0 << 4.0, -3.0;
  const RunTrace trace = run(p, cfg, x0);
  REQUIRE(!trace.failed);

  const double s = resolved_step(cfg, p);
  Eigen::Vector2d x = x0, x_old = x0;
  for (long long k = 1; k < cfg.max_iter; ++k) {
    const double t = static_cast<double>(k) + cfg.gamma + 1.0;
    const Eigen::Vector2d y = x + (t - cfg.alpha) / t * (x - x_old);
    x_old = x;
    x = y - s * (Q * y - q);
    CHECK((trace.iterate(k + 1) - Vector(x)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("FBiPG reduces to BFPG with gamma = beta = alpha - 1, c = 1") {
  SolverConfig cfg;
  cfg.method = Method::FBiPG;
  cfg.alpha = 4.0;
  cfg.schedule.delta = 1.3;
  const SolverConfig eff = fbipg_as_bfpg(cfg);
  CHECK(eff.method == Method::BFPG);
  CHECK(eff.gamma == 3.0);
  CHECK(eff.schedule.beta == 3.0);
  CHECK(eff.schedule.c == 1.0);
  CHECK(eff.schedule.delta == 1.3);
  for (long long k = 1; k < 50; ++k) {
    CHECK(momentum_coefficient(eff.alpha, eff.gamma, k) ==
          doctest::Approx(1.0 - cfg.alpha / (static_cast<double>(k) + cfg.alpha)));
  }
}

TEST_CASE("FBiPG matches an independent transcription on the min-norm toy") {
  const auto data = min_norm_toy_data(5, 20, 1);
  const auto p = make_min_norm_problem(data.A, data.b);
  SolverConfig cfg;
  cfg.method = Method::FBiPG;
  cfg.alpha = 4.0;
  cfg.schedule.delta = 1.5;
  cfg.max_iter = 50;
  std::mt19937_64 rng(9);
  const Vector x0 = testing_support::gaussian(20, rng);
  const RunTrace trace = run(p, cfg, x0);

  const double s = resolved_step(cfg, p), a = cfg.alpha;
  Vector x = x0, x_old = x0;
  for (long long k = 1; k < cfg.max_iter; ++k) {
    const double kk = static_cast<double>(k);
    const double eps = 1.0 / std::pow(kk + a - 1.0, cfg.schedule.delta);
    const Vector y = x + kk / (kk + a) * (x - x_old);
    x_old = x;
    x = y - s * (data.A.transpose() * (data.A * y - data.b) + eps * y);
    CHECK((trace.iterate(k + 1) - x).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("staBiM step rule") {
  const auto p = testing_support::scalar_quadratics();
  SolverConfig cfg;
  cfg.method = Method::StaBiM;
  cfg.schedule = unit_schedule();
  auto st = step_stabim(p, cfg, initial_state(p, cfg, scalar(1.0)));
  CHECK(st.stabim_eta == doctest::Approx(0.75));
  CHECK(st.theta_k == doctest::Approx(0.542857142857142857));
  while (!(st.stabim_eta < 0.01)) st = step_stabim(p, cfg, st);
  st = step_stabim(p, cfg, st);
  CHECK(std::abs(st.theta_k - cfg.stabim_theta_tilde) / cfg.stabim_theta_tilde < 0.01);
}

TEST_CASE("Bi-SG-II two-stage update") {
  const auto p = testing_support::scalar_quadratics();
  SolverConfig cfg;
  cfg.method = Method::BiSG2;
  cfg.step = 1.0;
  cfg.schedule = unit_schedule();
  cfg.schedule.beta = 7.0;  // ignored: Bi-SG-II uses (k + 1)^delta
  CHECK(method_epsilon(cfg, 0) == 1.0);
  const auto st = step_bisg2(p, cfg, initial_state(p, cfg, scalar(2.0)));
  CHECK(st.x_curr[0] == doctest::Approx(1.0));

  auto toy = make_min_norm_toy(3, 6, 2);
  cfg.step = 0.5;
  Vector x0 = Vector::Ones(6);
  const auto a = step_bisg2(toy, cfg, initial_state(toy, cfg, x0));
  const Vector y = x0 - 0.5 * toy.inner.smooth.grad(x0);
  CHECK((a.x_curr - (y - 0.5 * 1.0 * toy.outer.smooth.grad(y))).norm() < 1e-14);
}

TEST_CASE("validation of solver configurations") {
  const auto toy = make_min_norm_toy(5, 20, 1);
  SolverConfig cfg;
  cfg.method = Method::BPG;
  cfg.step = 2.0 / toy.inner.smooth.lipschitz();
  CHECK_THROWS_AS(validate(cfg, toy), ValidationError);
  cfg.method = Method::BFPG;
  cfg.step.reset();
  cfg.alpha = 2.9;
  try {
    validate(cfg, toy);
    FAIL("alpha = 2.9 accepted");
  } catch (const ValidationError& e) {
    CHECK(e.path() == "alpha");
  }
  cfg.method = Method::BiSG2;
  cfg.schedule.delta = 1.2;
  CHECK_THROWS_AS(validate(cfg, toy), ValidationError);
  cfg.schedule.delta = 0.9;
  cfg.schedule.c = 10.0;
  CHECK_THROWS_AS(validate(cfg, toy), ValidationError);
  cfg.schedule.c = 1.0;
  CHECK_NOTHROW(validate(cfg, toy));
}

TEST_CASE("run: initial point only, convergence, determinism") {
  const auto toy = make_min_norm_toy(5, 20, 1);
  SolverConfig cfg;
  cfg.method = Method::BPG;
  cfg.max_iter = 0;
  const RunTrace empty = run(toy, cfg, Vector::Zero(20));
  REQUIRE(empty.records.size() == 1);
  CHECK(empty.records[0].k == 0);

  cfg.max_iter = 10000;
  cfg.schedule.delta = 0.9;
  const RunTrace t1 = run(toy, cfg, Vector::Zero(20));
  CHECK(t1.records.back().dist < 1e-3);
  const RunTrace t2 = run(toy, cfg, Vector::Zero(20));
  CHECK(trace_csv(t1) == trace_csv(t2));
  CHECK(t1.iterate(10000) == t2.iterate(10000));

  SolverConfig b;
  b.method = Method::BFPG;
  b.alpha = 4.0;
  b.gamma = 3.0;
  b.schedule.c = 1.0;
  b.schedule.beta = 3.0;
  b.schedule.delta = 1.5;
  b.max_iter = 500;
  SolverConfig f = b;
  f.method = Method::FBiPG;
  CHECK(trace_csv(run(toy, b, Vector::Ones(20))) == trace_csv(run(toy, f, Vector::Ones(20))));
}

TEST_CASE("F_res never undershoots an exact min_inner") {
  const auto nem = make_nemirovsky({40, 20, 50.0});
  for (Method m : {Method::BPG, Method::BFPG, Method::FBiPG, Method::StaBiM, Method::BiSG2}) {
    SolverConfig cfg;
    cfg.method = m;
    cfg.max_iter = 300;
    cfg.schedule.c = m == Method::BiSG2 ? 1.0 : 10.0;
    cfg.schedule.delta = is_second_order(m) ? 1.5 : 0.75;
    const RunTrace t = run(nem, cfg, Vector::Zero(40));
    for (const auto& r : t.records) CHECK(r.F_res >= -1e-10);
  }
}

TEST_CASE("iterates stay in a box when the inner nonsmooth part is a box indicator") {
  BilevelProblem p;
  p.id = "boxed";
  p.dimension = 6;
  const Vector target = (Vector(6) << 3, -2, 0.5, 0.1, 7, -0.3).finished();
  p.inner.smooth = SmoothTerm([target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); },
                              [target](const Vector& x) { return Vector(x - target); }, 1.0);
  p.inner.nonsmooth = ProxTerm::box(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
  p.outer.smooth = SmoothTerm::squared_norm();
  for (Method m : {Method::BPG, Method::BFPG, Method::StaBiM, Method::BiSG2}) {
    SolverConfig cfg;
    cfg.method = m;
    cfg.max_iter = 200;
    cfg.schedule.delta = m == Method::BiSG2 ? 0.8 : 1.2;
    const RunTrace t = run(p, cfg, Vector::Constant(6, 0.5));
    for (long long k = 0; k <= cfg.max_iter; ++k) {
      const Vector& x = t.iterate(k);
      CHECK(x.minCoeff() >= 0.0);
      CHECK(x.maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("zero schedule reduces to proximal gradient and FISTA rates on Nemirovsky") {
  const auto nem = make_nemirovsky({200, 100, 50.0});
  SolverConfig cfg;
  cfg.schedule = Schedule::zero();
  cfg.max_iter = 10000;
  cfg.method = Method::BPG;
  const RunTrace pg = run(nem, cfg, Vector::Zero(200), {}, {10, false});
  for (std::size_t i = 1; i < pg.records.size(); ++i) {
    CHECK(pg.records[i].F_res <= pg.records[i - 1].F_res * (1 + 1e-12));
  }
  CHECK(fit_rate(pg, TraceField::F_res, {1000, 10000}).slope <= -0.9);
  cfg.method = Method::BFPG;
  cfg.gamma = 20.0;
  const RunTrace fista = run(nem, cfg, Vector::Zero(200), {}, {10, false});
  CHECK(fit_rate(fista, TraceField::F_res, {1000, 10000}).slope <= -1.8);
}

TEST_CASE("run records a failure instead of throwing when iterates blow up") {
  const auto p = testing_support::scalar_quadratics();
  SolverConfig cfg;
  cfg.method = Method::BPG;
  cfg.step = 1.99;
  cfg.schedule.c = 1e300;
  cfg.schedule.delta = 0.5;
  cfg.max_iter = 5000;
  RunTrace t;
  CHECK_NOTHROW(t = run(p, cfg, scalar(1e300)));
  CHECK(t.failed);
  CHECK(!t.error.empty());
  CHECK(t.records.size() < 5001);
}
