#include "bilevel/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>

#include "bilevel/algorithms.hpp"
#include "bilevel/linalg.hpp"

namespace bilevel {

void NemirovskySpec::validate() const {
  if (!(J > 1)) throw ValidationError("J", "must be > 1");
  if (!(J < d)) throw ValidationError("J", "must be < d");
  if (!std::isfinite(xhat_value)) throw ValidationError("xhat_value", "must be finite");
}

namespace {

double nemirovsky_value(const Vector& x, Eigen::Index J) {
  double total = 0.5 * (x[0] - 1.0) * (x[0] - 1.0);
  for (Eigen::Index j = 1; j < J; ++j) {
    const double diff = x[j - 1] - x[j];
    total += 0.5 * diff * diff;
  }
  return total;
}

}  // namespace

double nemirovsky_lipschitz(const NemirovskySpec& spec) {
  spec.validate();
  const Eigen::Index J = spec.J;
  // Hessian action on the active block; the remaining rows are zero.
  auto hess = [J](const Vector& v) {
    Vector g;
    kernels::serial::chain_gradient(v, J, g);
    g[0] += 1.0;
    return g;
  };
  const double l = power_iteration(hess, J, 1e-14).eigenvalue;
  if (!(l > 0.0 && l < 4.0)) throw std::logic_error("Nemirovsky Hessian spectrum outside (0, 4)");
  return l;
}

double nemirovsky_growth_modulus(Eigen::Index J) {
  if (!(J > 1)) throw ValidationError("J", "must be > 1");
  const double s = std::sin(std::numbers::pi / (2.0 * (2.0 * static_cast<double>(J) + 1.0)));
  return 4.0 * s * s;
}

BilevelProblem make_nemirovsky(const NemirovskySpec& spec, kernels::Backend backend) {
  spec.validate();
  const Eigen::Index d = spec.d, J = spec.J;
  BilevelProblem prob;
  prob.id = "nemirovsky_d" + std::to_string(d) + "_J" + std::to_string(J);
  prob.dimension = d;
  prob.inner.smooth = SmoothTerm(
      [J](const Vector& x) { return nemirovsky_value(x, J); },
      [J, backend](const Vector& x) {
        Vector g;
        kernels::chain_gradient(backend, x, J, g);
        return g;
      },
      nemirovsky_lipschitz(spec), "nemirovsky");
  prob.inner.nonsmooth = ProxTerm::zero();
  prob.outer.smooth = SmoothTerm::zero();
  prob.outer.nonsmooth = ProxTerm::shifted_l1(Vector::Constant(1, spec.xhat_value));

  Oracle o;
  Vector xs = Vector::Constant(d, spec.xhat_value);
  xs.head(J).setOnes();
  o.x_star = xs;
  o.min_inner = 0.0;
  o.min_outer_on_argmin = static_cast<double>(J) * std::abs(spec.xhat_value - 1.0);
  o.holder = HolderData{2.0, nemirovsky_growth_modulus(J)};
  o.multiplier_norm = std::sqrt(static_cast<double>(J));
  o.argmin_projector = [J](const Vector& x) {
    Vector p = x;
    p.head(J).setOnes();
    return p;
  };
  prob.oracle = std::move(o);
  return prob;
}

MinNormData min_norm_toy_data(Eigen::Index m, Eigen::Index d, std::uint64_t seed) {
  if (!(m >= 1 && m < d)) throw ValidationError("m", "need 1 <= m < d");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd A(m, d);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < d; ++j) A(i, j) = normal(rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A * A.transpose());
    const double hi = eig.eigenvalues().maxCoeff();
    const double lo = eig.eigenvalues().minCoeff();
    if (!(lo > 1e-10 * hi)) continue;
    A /= std::sqrt(hi);
    Vector z(d);
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    return {A, A * z};
  }
  throw RankDeficient("could not draw a full-row-rank matrix in 10 attempts");
}

BilevelProblem make_min_norm_problem(const Eigen::MatrixXd& A, const Vector& b, std::string id) {
  if (A.rows() != b.size()) throw ValidationError("b", "length must equal rows of A");
  if (A.rows() < 1 || A.cols() < 1) throw ValidationError("A", "must be nonempty");
  const Eigen::MatrixXd gram = A * A.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  if (!(hi > 0.0) || !(lo > 1e-12 * hi)) throw RankDeficient("A is not full row rank");
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const kernels::RowMatrix a = A;
  const kernels::RowMatrix at = A.transpose();

  BilevelProblem prob;
  prob.id = std::move(id);
  prob.dimension = A.cols();
  prob.inner.smooth = SmoothTerm(
      [a, b](const Vector& x) {
        Vector r;
        kernels::serial::gemv(a, x, r);
        return 0.5 * (r - b).squaredNorm();
      },
      [a, at, b](const Vector& x) {
        Vector r, g;
        kernels::serial::gemv(a, x, r);
        r -= b;
        kernels::serial::gemv(at, r, g);
        return g;
      },
      hi, "least_squares");
  prob.inner.nonsmooth = ProxTerm::zero();
  prob.outer.smooth = SmoothTerm::squared_norm(1.0);
  prob.outer.nonsmooth = ProxTerm::zero();

  Oracle o;
  const Vector xs = A.transpose() * llt.solve(b);
  o.x_star = xs;
  o.min_inner = 0.5 * (A * xs - b).squaredNorm();
  o.min_outer_on_argmin = 0.5 * xs.squaredNorm();
  o.holder = HolderData{2.0, lo};
  o.multiplier_norm = xs.norm();
  o.argmin_projector = [A, b, llt](const Vector& x) {
    return Vector(x - A.transpose() * llt.solve(A * x - b));
  };
  prob.oracle = std::move(o);
  return prob;
}

BilevelProblem make_min_norm_toy(Eigen::Index m, Eigen::Index d, std::uint64_t seed) {
  const MinNormData data = min_norm_toy_data(m, d, seed);
  return make_min_norm_problem(data.A, data.b,
                               "min_norm_m" + std::to_string(m) + "_d" + std::to_string(d) +
                                   "_seed" + std::to_string(seed));
}

Eigen::Index lifted_dimension(Eigen::Index p, int degree) {
  if (p < 1) throw ValidationError("raw_features", "must be >= 1");
  if (degree < 1) throw ValidationError("lift_degree", "must be >= 1");
  // C(p + degree, degree) by the multiplicative formula; exact in integers.
  long long c = 1;
  for (int i = 1; i <= degree; ++i) c = c * (p + i) / i;
  return static_cast<Eigen::Index>(c);
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).sum() / n;
    out.col(j).array() -= mean;
    const double sd = std::sqrt(out.col(j).squaredNorm() / n);
    if (sd > 0.0) out.col(j) /= sd;
  }
  return out;
}

kernels::RowMatrix lift_features(const Eigen::MatrixXd& x, int degree) {
  const Eigen::Index p = x.cols(), n = x.rows();
  const Eigen::Index dim = lifted_dimension(p, degree);
  kernels::RowMatrix out(n, dim);
  out.col(0).setOnes();
  Eigen::Index col = 1;
  // Each degree-(q+1) monomial extends a degree-q one by an index >= its last.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> prev;  // (column, last index)
  for (Eigen::Index i = 0; i < p; ++i) {
    out.col(col) = x.col(i);
    prev.push_back({col, i});
    ++col;
  }
  for (int q = 2; q <= degree; ++q) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> next;
    for (const auto& [c, last] : prev) {
      for (Eigen::Index i = last; i < p; ++i) {
        out.col(col) = out.col(c).cwiseProduct(x.col(i));
        next.push_back({col, i});
        ++col;
      }
    }
    prev = std::move(next);
  }
  return out;
}

BilevelProblem make_logistic_lifted(const Dataset& ds, const LogisticLiftSpec& spec,
                                    kernels::Backend backend) {
  if (spec.raw_features != 0 && spec.raw_features != ds.cols()) {
    throw ValidationError("raw_features", "does not match the dataset (" +
                                              std::to_string(ds.cols()) + " columns)");
  }
  if (spec.n_samples < 0 || spec.n_samples > ds.rows()) {
    throw ValidationError("n_samples", "exceeds dataset rows");
  }
  const Dataset used = spec.n_samples == 0 ? ds : take_rows(ds, spec.n_samples);
  if (used.rows() < 1) throw ValidationError("n_samples", "dataset is empty");
  const Eigen::Index dim = lifted_dimension(used.cols(), spec.lift_degree);
  if (dim > spec.dimension_cap) {
    throw DimensionOverflow("lifted dimension " + std::to_string(dim) + " exceeds cap " +
                            std::to_string(spec.dimension_cap));
  }
  const Eigen::MatrixXd raw = spec.standardize ? standardize_columns(used.features) : used.features;
  auto a = std::make_shared<const kernels::RowMatrix>(lift_features(raw, spec.lift_degree));
  auto at = std::make_shared<const kernels::RowMatrix>(a->transpose());
  const Vector labels = used.labels;
  const double n = static_cast<double>(used.rows());

  auto gram = [a, at](const Vector& v) {
    Vector z, w;
    kernels::serial::gemv(*a, v, z);
    kernels::serial::gemv(*at, z, w);
    return w;
  };
  const double lipschitz = power_iteration(gram, dim, 1e-12).eigenvalue / (4.0 * n);

  BilevelProblem prob;
  prob.id = "logistic_n" + std::to_string(used.rows()) + "_p" + std::to_string(used.cols()) +
            "_deg" + std::to_string(spec.lift_degree);
  prob.dimension = dim;
  prob.inner.smooth = SmoothTerm(
      [a, labels, n, backend](const Vector& x) {
        Vector z, loss, residual;
        kernels::gemv(backend, *a, x, z);
        kernels::logistic_terms(backend, z, labels, loss, residual);
        return kernels::ordered_sum(loss) / n;
      },
      [a, at, labels, n, backend](const Vector& x) {
        Vector z, loss, residual, g;
        kernels::gemv(backend, *a, x, z);
        kernels::logistic_terms(backend, z, labels, loss, residual);
        kernels::gemv(backend, *at, residual, g);
        return Vector(g / n);
      },
      lipschitz, "logistic");
  prob.inner.nonsmooth = ProxTerm::zero();
  prob.outer.smooth = SmoothTerm::zero();
  prob.outer.nonsmooth = ProxTerm::l1(1.0);
  return prob;
}

ReferenceValues compute_reference(const BilevelProblem& prob, const ReferenceSpec& spec) {
  if (spec.iterations < 1) throw ValidationError("reference.iterations", "must be >= 1");
  RunOptions opts;
  opts.store_iterates = false;
  opts.compute_energy = false;
  opts.record_every = std::max<long long>(1, spec.iterations / 1000);

  SolverConfig cfg;
  cfg.method = Method::BFPG;
  cfg.alpha = spec.alpha;
  cfg.gamma = spec.gamma;
  cfg.step_fraction = spec.step_fraction;
  cfg.max_iter = spec.iterations;

  ReferenceValues out;
  out.iterations = spec.iterations;
  out.min_inner = kInfinity;

  cfg.schedule = Schedule::zero();
  const RunTrace inner = run(prob, cfg, Vector::Zero(prob.dimension), {}, opts);
  if (inner.failed) throw Error("reference run failed: " + inner.error);
  for (const auto& r : inner.records) out.min_inner = std::min(out.min_inner, r.F_value);

  cfg.schedule = spec.schedule;
  const RunTrace outer = run(prob, cfg, Vector::Zero(prob.dimension), {}, opts);
  if (outer.failed) throw Error("reference run failed: " + outer.error);
  for (const auto& r : outer.records) out.min_inner = std::min(out.min_inner, r.F_value);
  out.min_outer = outer.records.back().H_value;
  return out;
}

void attach_reference_oracle(BilevelProblem& prob, const ReferenceValues& ref) {
  Oracle o;
  o.min_inner = ref.min_inner;
  o.min_outer_on_argmin = ref.min_outer;
  o.inner_exact = false;
  o.outer_exact = false;
  prob.oracle = std::move(o);
}

}  // namespace bilevel
