#include <cmath>
#include <random>

#include "doctest.h"

#include "bilevel/core.hpp"
#include "bilevel/diagnostics.hpp"
#include "prox_oracle.hpp"
#include "support.hpp"

using namespace bilevel;
using testing_support::brute_force_prox;
using testing_support::Real;

TEST_CASE("epsilon_discrete evaluates c/(k+beta)^delta") {
  Schedule s;
  s.c = 1, s.beta = 1, s.delta = 1;
  CHECK(epsilon_discrete(s, 0) == 1.0);
  s.c = 10, s.beta = 10, s.delta = 1.5;
  // 30-digit evaluation of 10 / 10^1.5
  CHECK(epsilon_discrete(s, 0) == doctest::Approx(0.316227766016837933).epsilon(1e-15));
  s.c = 100, s.beta = 1, s.delta = 1.9;
  CHECK(epsilon_discrete(s, 99) == doctest::Approx(0.0158489319246111349).epsilon(1e-14));
  CHECK(epsilon_discrete(Schedule::zero(), 5) == 0.0);
}

TEST_CASE("epsilon_discrete is decreasing with log-log slope -delta") {
  Schedule s;
  s.c = 3, s.beta = 2, s.delta = 0.7;
  std::vector<double> x, y;
  for (long long k = 0; k < 200; ++k) {
    if (k > 0) CHECK(epsilon_discrete(s, k) < epsilon_discrete(s, k - 1));
    x.push_back(static_cast<double>(k) + s.beta);
    y.push_back(epsilon_discrete(s, k));
  }
  const RateFit fit = fit_loglog(x, y);
  CHECK(std::abs(fit.slope + 0.7) < 1e-12);
  CHECK(1.0 - fit.r2 < 1e-12);
}

TEST_CASE("epsilon_continuous") {
  Schedule s;
  s.c = 1, s.delta = 1, s.t0 = 1;
  CHECK(epsilon_continuous(s, 1.0) == 1.0);
  s.delta = 2;
  CHECK(epsilon_continuous(s, 10.0) == doctest::Approx(0.01).epsilon(1e-15));
  s.c = 10, s.delta = 1.5;
  CHECK(epsilon_continuous(s, 4.0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK_THROWS_AS(epsilon_continuous(s, 0.5), ValidationError);
}

TEST_CASE("Schedule validation rejects nonpositive parameters") {
  Schedule s;
  s.c = -1;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = Schedule{};
  s.delta = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("regularized_value") {
  const auto toy = testing_support::planar_toy();
  Vector x(2);
  x << 1, 1;
  CHECK(regularized_value(toy, 0.0, x) == doctest::Approx(0.5));
  CHECK(regularized_value(toy, 1.0, x) == doctest::Approx(1.5));
  const Vector& xs = toy.require_x_star();
  CHECK(regularized_value(toy, 1.0, xs) ==
        doctest::Approx(toy.oracle->min_inner + toy.outer_value(xs)));
}

TEST_CASE("regularized_gradient examples and finite differences") {
  const auto p = testing_support::scalar_quadratics();
  Vector x(1);
  x << 1.0;
  CHECK(regularized_gradient(p, 1.0, x)[0] == doctest::Approx(1.0));
  CHECK(regularized_gradient(p, 0.0, x)[0] == doctest::Approx(1.0));

  const auto nem = make_nemirovsky({20, 10, 50.0});
  const auto toy = make_min_norm_toy(4, 12, 5);
  std::mt19937_64 rng(11);
  for (const BilevelProblem* prob : {&toy, &p}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector z = testing_support::gaussian(prob->dimension, rng);
      const double eps = 0.3;
      const Vector g = regularized_gradient(*prob, eps, z);
      Vector fd(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double h = 1e-5 * (1.0 + std::abs(z[i]));
        Vector a = z, b = z;
        a[i] += h;
        b[i] -= h;
        fd[i] = (regularized_value(*prob, eps, a) - regularized_value(*prob, eps, b)) / (2 * h);
      }
      CHECK((g - fd).norm() <= 1e-5 * (1.0 + g.norm()));
    }
  }
  // Nemirovsky's outer part is nonsmooth, so only the inner gradient is checked.
  for (int trial = 0; trial < 100; ++trial) {
    const Vector z = testing_support::gaussian(nem.dimension, rng);
    const Vector g = nem.inner.smooth.grad(z);
    Vector fd(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      Vector a = z, b = z;
      a[i] += 1e-5;
      b[i] -= 1e-5;
      fd[i] = (nem.inner.smooth.eval(a) - nem.inner.smooth.eval(b)) / 2e-5;
    }
    CHECK((g - fd).norm() <= 1e-6 * (1.0 + g.norm()));
  }
}

TEST_CASE("SmoothTerm sampled invariants") {
  const auto toy = make_min_norm_toy(5, 15, 2);
  const auto nem = make_nemirovsky({30, 12, 50.0});
  std::mt19937_64 rng(3);
  for (const SmoothTerm* t : {&toy.inner.smooth, &toy.outer.smooth, &nem.inner.smooth}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = testing_support::gaussian(t == &nem.inner.smooth ? 30 : 15, rng);
      const Vector y = testing_support::gaussian(x.size(), rng);
      CHECK((t->grad(x) - t->grad(y)).norm() <= t->lipschitz() * (x - y).norm() * (1 + 1e-12));
      CHECK(t->eval(y) >= t->eval(x) + t->grad(x).dot(y - x) - 1e-10);
    }
  }
}

TEST_CASE("combined_prox examples") {
  Vector v(2);
  v << 3.0, -0.5;
  CHECK(combined_prox(ProxTerm::zero(), ProxTerm::zero(), 1.0, 1.0, v) == v);
  const Vector st = combined_prox(ProxTerm::zero(), ProxTerm::l1(), 1.0, 1.0, v);
  auto abs_phi = [](const Real& y) { return abs(y); };
  CHECK(st[0] == doctest::Approx(brute_force_prox(abs_phi, 1.0, 3.0, -10, 10)).epsilon(1e-9));
  CHECK(std::abs(st[1] - brute_force_prox(abs_phi, 1.0, -0.5, -10, 10)) < 1e-9);
  CHECK(st[0] == 2.0);
  CHECK(st[1] == 0.0);

  Vector w(1);
  w << 52.0;
  const Vector shifted =
      combined_prox(ProxTerm::zero(), ProxTerm::shifted_l1(Vector::Constant(1, 50.0)), 0.5, 2.0, w);
  const double oracle = brute_force_prox([](const Real& y) { return Real(abs(y - 50)); }, 1.0, 52.0, 0, 100);
  CHECK(std::abs(shifted[0] - oracle) < 1e-9);
  CHECK(shifted[0] == doctest::Approx(51.0));
}

TEST_CASE("combined_prox of two separable terms matches the brute-force oracle") {
  const ProxTerm box = ProxTerm::box(Vector::Constant(1, -1.0), Vector::Constant(1, 2.0));
  const ProxTerm l1 = ProxTerm::l1(0.7);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0), us(0.05, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = us(rng), eps = us(rng);
    Vector v(3);
    for (auto& x : v) x = u(rng);
    const Vector got = combined_prox(box, l1, s, eps, v);
    for (Eigen::Index i = 0; i < 3; ++i) {
      auto phi = [&](const Real& y) { return Real(0.7 * eps * abs(y)); };
      CHECK(std::abs(got[i] - brute_force_prox(phi, s, v[i], -1.0, 2.0)) < 1e-8);
    }
  }
}

TEST_CASE("combined_prox rejects unsupported combinations") {
  ProxTerm opaque("opaque", [](const Vector& x) { return x.norm(); },
                  [](double s, const Vector& v) {
                    const double n = v.norm();
                    return n <= s ? Vector(Vector::Zero(v.size())) : Vector(v * (1.0 - s / n));
                  });
  Vector v = Vector::Ones(3);
  CHECK_THROWS_AS(combined_prox(opaque, ProxTerm::l1(), 1.0, 1.0, v), UnsupportedProxCombination);
  CHECK_NOTHROW(combined_prox(opaque, ProxTerm::l1(), 1.0, 0.0, v));
  JointProx joint = [](double, double, const Vector& x) { return x; };
  CHECK(combined_prox(opaque, ProxTerm::l1(), 1.0, 1.0, v, joint) == v);
}

namespace {

struct ScalarCase {
  const char* name;
  ProxTerm term;
  std::function<Real(const Real&)> phi;
  double lo, hi;
};

}  // namespace

TEST_CASE("every shipped prox matches the brute-force oracle and is firmly nonexpansive") {
  std::vector<ScalarCase> cases = {
      {"zero", ProxTerm::zero(), [](const Real&) { return Real(0); }, -1e3, 1e3},
      {"l1", ProxTerm::l1(1.3), [](const Real& y) { return Real(Real(1.3) * abs(y)); }, -1e3, 1e3},
      {"shifted_l1", ProxTerm::shifted_l1(Vector::Constant(1, 2.5), 0.8),
       [](const Real& y) { return Real(Real(0.8) * abs(y - Real(2.5))); }, -1e3, 1e3},
      {"box", ProxTerm::box(Vector::Constant(1, -0.5), Vector::Constant(1, 1.5)),
       [](const Real&) { return Real(0); }, -0.5, 1.5},
      {"squared_norm", ProxTerm::squared_norm(2.0), [](const Real& y) { return Real(y * y); }, -1e3, 1e3},
  };
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uv(-10.0, 10.0), us(0.01, 5.0);
  for (const auto& c : cases) {
    CAPTURE(c.name);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const double s = us(rng);
      Vector v(4), w(4);
      for (auto& x : v) x = uv(rng);
      for (auto& x : w) x = uv(rng);
      const Vector p = c.term.prox(s, v), q = c.term.prox(s, w);
      for (Eigen::Index i = 0; i < 4; ++i) {
        worst = std::max(worst, std::abs(p[i] - brute_force_prox(c.phi, s, v[i], c.lo, c.hi)));
      }
      CHECK((p - q).squaredNorm() <= (p - q).dot(v - w) + 1e-12);
      CHECK(std::isfinite(c.term.eval(p)));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("prox optimality for the l1 norm: v - p lies in s * subdifferential") {
  std::mt19937_64 rng(23);
  const ProxTerm l1 = ProxTerm::l1();
  for (int trial = 0; trial < 100; ++trial) {
    const Vector v = testing_support::gaussian(6, rng, 3.0);
    const double s = 0.7;
    const Vector p = l1.prox(s, v);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double g = (v[i] - p[i]) / s;
      if (p[i] != 0.0) {
        CHECK(g == doctest::Approx(p[i] > 0 ? 1.0 : -1.0));
      } else {
        CHECK(std::abs(g) <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("CompositeObjective value sums both parts and propagates infinity") {
  CompositeObjective obj{SmoothTerm::squared_norm(2.0),
                         ProxTerm::box(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0))};
  Vector x(2);
  x << 0.5, 0.25;
  CHECK(obj.value(x) == doctest::Approx(0.3125));
  x << 2.0, 0.0;
  CHECK(obj.value(x) == kInfinity);
}

TEST_CASE("BilevelProblem validation checks oracle consistency") {
  auto toy = make_min_norm_toy(3, 8, 4);
  CHECK_NOTHROW(toy.validate());
  toy.oracle->min_inner = 1.0;
  CHECK_THROWS_AS(toy.validate(), ValidationError);
  auto nem = make_nemirovsky({10, 4, 50.0});
  nem.oracle->holder->rho = 2.5;
  CHECK_THROWS_AS(nem.validate(), ValidationError);
  HolderData h{1.5, 1.0};
  CHECK(1.0 / h.rho + 1.0 / h.dual_exponent() == doctest::Approx(1.0));
}
