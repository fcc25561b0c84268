#include <cmath>

#include "doctest.h"

#include "bilevel/algorithms.hpp"
#include "bilevel/diagnostics.hpp"
#include "bilevel/problems.hpp"
#include "support.hpp"

using namespace bilevel;

namespace {

Schedule sched(double c, double beta, double delta) {
  Schedule s;
  s.c = c, s.beta = beta, s.delta = delta;
  return s;
}

LyapunovParams params(double lambda, double theta, double gamma = 0.0, double alpha = 4.0) {
  LyapunovParams p;
  p.lambda = lambda, p.theta = theta, p.gamma = gamma, p.alpha = alpha;
  return p;
}

Vector e1() { return (Vector(2) << 1.0, 0.0).finished(); }

RunTrace synthetic_trace(const std::function<double(double)>& f, long long k_max) {
  RunTrace t;
  for (long long k = 0; k <= k_max; ++k) {
    TraceRecord r;
    r.k = k;
    r.F_res = k == 0 ? std::nan("") : f(static_cast<double>(k));
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("lyapunov_first hand-evaluated values") {
  const auto toy = testing_support::planar_toy();
  const auto s = sched(1, 1, 1);
  CHECK(lyapunov_first(toy, s, params(2, 1), 1, e1()) == doctest::Approx(2.0));
  CHECK(lyapunov_first(toy, s, params(2, 1), 7, Vector::Zero(2)) == 0.0);
  const auto nem = make_nemirovsky({10, 4, 50.0});
  auto no_oracle = nem;
  no_oracle.oracle.reset();
  CHECK_THROWS_AS(lyapunov_first(no_oracle, s, params(2, 1), 1, Vector::Zero(10)), MissingOracle);
}

TEST_CASE("lyapunov_second hand-evaluated values and nonnegativity") {
  const auto toy = testing_support::planar_toy();
  const auto s = sched(1, 1, 1);
  CHECK(lyapunov_second(toy, s, params(2.5, 1), 1, e1(), e1()) == doctest::Approx(4.75));
  CHECK(lyapunov_second(toy, s, params(2.5, 1), 3, Vector::Zero(2), Vector::Zero(2)) == 0.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vector a = testing_support::gaussian(2, rng), b = testing_support::gaussian(2, rng);
    CHECK(lyapunov_second(toy, s, params(2.5, 0.8, 1.0), 1 + i, a, b) >= 0.0);
  }
}

TEST_CASE("first-order energies differ by the lambda identity") {
  const auto toy = make_min_norm_toy(5, 20, 1);
  SolverConfig cfg;
  cfg.max_iter = 200;
  cfg.schedule.delta = 0.9;
  const RunTrace t = run(toy, cfg, Vector::Ones(20));
  const Vector& xs = toy.require_x_star();
  for (long long k = 1; k <= cfg.max_iter; ++k) {
    const double e1v = lyapunov_first(toy, cfg.schedule, params(1.5, 0.5), k, t.iterate(k));
    const double e2v = lyapunov_first(toy, cfg.schedule, params(3.0, 0.5), k, t.iterate(k));
    const double want = 0.75 * (t.iterate(k) - xs).squaredNorm();
    CHECK(std::abs((e2v - e1v) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("zeta values") {
  CHECK(zeta_first(sched(1, 1, 1), params(2, 1), 1) == doctest::Approx(1.0));
  CHECK(zeta_second(sched(1, 1, 2), params(2.5, 1), 1) == doctest::Approx(1.25));
  const auto flat = sched(0.3, 1, 1e-14);
  CHECK(zeta_first(flat, params(2, 0.5), 40) == doctest::Approx(0.5 * 1.0 * epsilon_discrete(flat, 40)));
  const auto p2 = params(2.5, 0.7, 2.0);
  CHECK(zeta_second(flat, p2, 40) ==
        doctest::Approx(0.7 * (0.5 * p2.t(40) + 0.7 * 1.5) * epsilon_discrete(flat, 40)));
}

TEST_CASE("zeta_second is positive for delta <= 2 and lambda > 2") {
  for (double delta : {0.5, 1.0, 1.5, 2.0}) {
    for (double lambda : {2.01, 2.5, 2.99}) {
      const auto s = sched(1.0, 1.0, delta);
      const auto p = params(lambda, 0.9, 0.0);
      for (long long k = 1; k <= 1000000; k = k < 100 ? k + 1 : k + k / 50) {
        CHECK(zeta_second(s, p, k) > 0.0);
      }
    }
  }
}

TEST_CASE("zeta sandwich C1 k^(eta-1) eps_{k-1} <= zeta <= C2 k^(eta-1) eps_k") {
  const auto s = sched(10, 10, 0.75);
  const auto z1 = zeta_sandwich(Order::First, s, params(2, 0.9), 100, 1000000);
  CHECK(z1.holds);
  const auto s2 = sched(10, 10, 1.5);
  const auto p2 = params(2.5, 0.9, 20.0);
  const auto z2 = zeta_sandwich(Order::Second, s2, p2, 100, 1000000);
  CHECK(z2.holds);
  for (long long k : {100LL, 1234LL, 99999LL, 1000000LL}) {
    const double kk = static_cast<double>(k);
    CHECK(zeta_second(s2, p2, k) >= z2.c1 * kk * epsilon_discrete(s2, k - 1) * (1 - 1e-12));
    CHECK(zeta_second(s2, p2, k) <= z2.c2 * kk * epsilon_discrete(s2, k) * (1 + 1e-12));
  }
}

TEST_CASE("first-order dissipation on the min-norm toy") {
  const auto toy = make_min_norm_toy(5, 20, 1);
  SolverConfig cfg;
  cfg.method = Method::BPG;
  cfg.step = 0.5;
  cfg.schedule.delta = 0.9;
  cfg.max_iter = 1000;
  std::mt19937_64 rng(3);
  const RunTrace t = run(toy, cfg, testing_support::gaussian(20, rng));
  const auto rep = check_dissipation_first(toy, cfg.schedule, params(2, 0.5), t);
  CHECK(rep.k0 == 1);
  CHECK(rep.violations == 0);

  RunTrace corrupted = t;
  corrupted.iterates[500] += Vector::Constant(20, 3.0);
  const auto bad = check_dissipation_first(toy, cfg.schedule, params(2, 0.5), corrupted);
  CHECK(bad.violations > 0);
  CHECK(bad.worst_slack < 0.0);
}

TEST_CASE("second-order dissipation on the min-norm toy") {
  const auto toy = make_min_norm_toy(5, 20, 1);
  SolverConfig cfg;
  cfg.method = Method::BFPG;
  cfg.step = 0.9 / toy.inner.smooth.lipschitz();
  cfg.alpha = 4.0;
  cfg.schedule.delta = 1.5;
  cfg.max_iter = 1000;
  std::mt19937_64 rng(3);
  const RunTrace t = run(toy, cfg, testing_support::gaussian(20, rng));
  const auto p = params(2.5, std::sqrt(*cfg.step), 0.0, 4.0);
  const auto rep = check_dissipation_second(toy, cfg.schedule, p, t);
  CHECK(rep.k0 >= 1);
  CHECK(rep.k0 < 50);

  RunTrace corrupted = t;
  corrupted.iterates[600] += Vector::Constant(20, 3.0);
  CHECK(check_dissipation_second(toy, cfg.schedule, p, corrupted).violations > 0);
}

TEST_CASE("dissipation slack vanishes for a trace resting at x*") {
  const auto toy = make_min_norm_toy(5, 20, 1);
  const Vector& xs = toy.require_x_star();
  for (Method m : {Method::BPG, Method::BFPG}) {
    SolverConfig cfg;
    cfg.method = m;
    cfg.schedule = Schedule::zero();
    cfg.max_iter = 50;
    const RunTrace t = run(toy, cfg, xs);
    const auto rep = m == Method::BPG
                         ? check_dissipation_first(toy, cfg.schedule, params(2, 0.5), t)
                         : check_dissipation_second(toy, cfg.schedule, params(2.5, 0.9), t);
    for (std::size_t i = 0; i < rep.slack.size(); ++i) CHECK(std::abs(rep.slack[i]) <= rep.tolerance[i]);
  }
}

TEST_CASE("dissipation needs full storage and an oracle") {
  const auto toy = make_min_norm_toy(5, 20, 1);
  SolverConfig cfg;
  cfg.max_iter = 20;
  RunOptions opts;
  opts.store_iterates = false;
  const RunTrace t = run(toy, cfg, Vector::Zero(20), {}, opts);
  CHECK_THROWS_AS(check_dissipation_first(toy, cfg.schedule, params(2, 0.5), t), StorageUnavailable);
  auto bare = toy;
  bare.oracle.reset();
  CHECK_THROWS_AS(check_dissipation_first(bare, cfg.schedule, params(2, 0.5), run(toy, cfg, Vector::Zero(20))),
                  MissingOracle);
}

TEST_CASE("LyapunovParams validation") {
  CHECK_THROWS_AS(params(1.0, 1).validate(Order::First), ValidationError);
  CHECK_NOTHROW(params(1.1, 1).validate(Order::First));
  CHECK_THROWS_AS(params(3.0, 1, 0, 4).validate(Order::Second), ValidationError);
  CHECK_NOTHROW(params(2.5, 1, 0, 4).validate(Order::Second));
  CHECK(default_lambda(Order::First, 4.0) == 2.0);
  CHECK(default_lambda(Order::Second, 4.0) == 2.5);
}

TEST_CASE("fit_rate on power laws") {
  const RunTrace t = synthetic_trace([](double k) { return 3.0 / (k * k); }, 10000);
  const RateFit fit = fit_rate(t, TraceField::F_res, {10, 10000});
  CHECK(std::abs(fit.slope + 2.0) < 1e-9);
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)));

  // k^-2 log k has local slope -2 + 1/log k: above -2, decreasing toward it.
  const RunTrace lt = synthetic_trace([](double k) { return std::log(k) / (k * k); }, 100000);
  double previous = 0.0;
  for (long long lo : {10LL, 100LL, 1000LL, 10000LL}) {
    const double slope = fit_rate(lt, TraceField::F_res, {lo, lo * 10}).slope;
    CHECK(slope > -2.0);
    if (lo > 10) CHECK(slope < previous);
    previous = slope;
  }

  RunTrace bad = t;
  bad.records[50].F_res = 0.0;
  CHECK_THROWS_AS(fit_rate(bad, TraceField::F_res, {10, 100}), NonPositiveValues);
}

TEST_CASE("partial sums of l^-r stay inside the integral brackets") {
  for (double r : {0.5, 1.0, 1.5}) {
    const long long k0 = 2;
    double sum = 0.0;
    std::vector<double> ks, sums, lows, highs;
    for (long long k = k0; k <= 100000; ++k) {
      sum += std::pow(static_cast<double>(k), -r);
      const auto [lo, hi] = sum_power_bounds(r, k0, k);
      CHECK(lo <= sum * (1 + 1e-12));
      CHECK(sum <= hi * (1 + 1e-12));
      if (k >= 1000 && k % 100 == 0) {
        ks.push_back(static_cast<double>(k));
        sums.push_back(sum);
        lows.push_back(lo);
        highs.push_back(hi);
      }
    }
    const double s = fit_loglog(ks, sums).slope;
    const double a = fit_loglog(ks, lows).slope, b = fit_loglog(ks, highs).slope;
    CHECK(s >= std::min(a, b) - 1e-9);
    CHECK(s <= std::max(a, b) + 1e-9);
  }
}

TEST_CASE("weighted averages and best iterate") {
  const std::vector<Vector> two = {Vector::Constant(1, 0.0), Vector::Constant(1, 4.0)};
  CHECK(weighted_average(two, {1.0, 3.0})[0] == doctest::Approx(3.0));
  CHECK_THROWS_AS(weighted_average(two, {0.0, 0.0}), ValidationError);

  const auto toy = make_min_norm_toy(5, 20, 1);
  SolverConfig still;
  still.schedule = Schedule::zero();
  still.max_iter = 10;
  const Vector v = toy.require_x_star();
  const RunTrace flat = run(toy, still, v);
  const auto p1 = params(2, resolved_step(still, toy));
  const auto b0 = best_iterate(toy, flat, sched(1, 1, 0.9), p1, Order::First, 8);
  CHECK((b0.x_bar - v).norm() < 1e-14);
  CHECK((b0.x_best - v).norm() < 1e-14);

  SolverConfig cfg;
  cfg.method = Method::BFPG;
  cfg.schedule.delta = 1.5;
  cfg.max_iter = 300;
  std::mt19937_64 rng(8);
  const RunTrace t = run(toy, cfg, testing_support::gaussian(20, rng));
  const auto p2 = params(2.5, std::sqrt(resolved_step(cfg, toy)));
  const auto best = best_iterate(toy, t, cfg.schedule, p2, Order::Second, 299);
  double z_sum = 0.0, h_sum = 0.0;
  for (long long l = 1; l <= 299; ++l) {
    const double z = zeta_second(cfg.schedule, p2, l);
    z_sum += z;
    h_sum += z * toy.outer_value(t.iterate(l));
  }
  CHECK(toy.outer_value(best.x_bar) <= h_sum / z_sum + 1e-12);
  CHECK(toy.outer_value(best.x_best) <= std::min(toy.outer_value(best.x_bar), toy.outer_value(t.iterate(300))));

  RunOptions thin;
  thin.store_iterates = false;
  CHECK_THROWS_AS(best_iterate(toy, run(toy, cfg, Vector::Zero(20), {}, thin), cfg.schedule, p2,
                               Order::Second, 100),
                  StorageUnavailable);
}

TEST_CASE("Holder growth on Nemirovsky with the spectral modulus") {
  const NemirovskySpec spec{60, 25, 50.0};
  const auto nem = make_nemirovsky(spec);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(spec.J, spec.J);
  hess(0, 0) = 1.0;
  for (Eigen::Index i = 0; i + 1 < spec.J; ++i) {
    hess(i, i) += 1.0;
    hess(i + 1, i + 1) += 1.0;
    hess(i, i + 1) -= 1.0;
    hess(i + 1, i) -= 1.0;
  }
  const double tau = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hess).eigenvalues().minCoeff();
  CHECK(nem.oracle->holder->tau == doctest::Approx(tau).epsilon(1e-10));

  std::mt19937_64 rng(4);
  std::vector<Vector> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back(testing_support::gaussian(spec.d, rng, 10.0));
  samples.push_back(nem.require_x_star());
  const auto rep = check_holder_growth(nem, samples);
  CHECK(rep.passed);
  CHECK(rep.worst_ratio >= 1.0 - 1e-9);
  CHECK(rep.skipped == 1);
  CHECK(rep.bound_checked);
  CHECK(rep.bound_holds);
}

TEST_CASE("Holder growth on the min-norm toy uses the smallest nonzero eigenvalue of A'A") {
  const auto data = min_norm_toy_data(4, 12, 6);
  const auto toy = make_min_norm_problem(data.A, data.b);
  const double tau =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(data.A * data.A.transpose()).eigenvalues().minCoeff();
  CHECK(toy.oracle->holder->tau == doctest::Approx(tau).epsilon(1e-10));
  std::mt19937_64 rng(5);
  std::vector<Vector> samples;
  for (int i = 0; i < 500; ++i) samples.push_back(testing_support::gaussian(12, rng, 3.0));
  CHECK(check_holder_growth(toy, samples).passed);

  auto wrong = toy;
  wrong.oracle->holder->tau = 4.0 * tau;
  CHECK(!check_holder_growth(wrong, samples).passed);
}

TEST_CASE("BFPG energy on Nemirovsky is bounded with shrinking tail oscillation") {
  const auto nem = make_nemirovsky({200, 100, 50.0});
  SolverConfig cfg;
  cfg.method = Method::BFPG;
  cfg.alpha = 4.0;
  cfg.gamma = 20.0;
  cfg.schedule = sched(10, 10, 1.5);
  cfg.max_iter = 10000;
  RunOptions opts;
  opts.store_iterates = false;
  const RunTrace t = run(nem, cfg, Vector::Zero(200), {}, opts);
  double e_max = 0.0;
  for (const auto& r : t.records) {
    if (r.k >= 1) e_max = std::max(e_max, std::abs(*r.E_lambda));
  }
  CHECK(std::isfinite(e_max));
  const double early = tail_oscillation(t, 1000, 2000);
  const double late = tail_oscillation(t, 9000, 10000);
  CHECK(late < early);
}
