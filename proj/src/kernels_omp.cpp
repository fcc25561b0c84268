#include "kernels_detail.hpp"

namespace bilevel::kernels::omp {

namespace {
// Below this many entries the fork/join overhead dominates.
constexpr Eigen::Index kMinParallel = 2048;
}

void gemv(const RowMatrix& a, const Vector& x, Vector& y) {
  y.resize(a.rows());
  const Eigen::Index rows = a.rows();
  const bool wide = rows * a.cols() >= kMinParallel;
#pragma omp parallel for schedule(static) if (wide)
  for (Eigen::Index i = 0; i < rows; ++i) y[i] = detail::row_dot(a, i, x);
}

void chain_gradient(const Vector& x, Eigen::Index active, Vector& g) {
  g.resize(x.size());
  const Eigen::Index n = x.size();
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (Eigen::Index j = 0; j < n; ++j) g[j] = detail::chain_entry(x, active, j);
}

void logistic_terms(const Vector& z, const Vector& labels, Vector& loss, Vector& residual) {
  loss.resize(z.size());
  residual.resize(z.size());
  const Eigen::Index n = z.size();
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::logistic_entry(z[i], labels[i], loss[i], residual[i]);
  }
}

void gradient_step(const Vector& y, const Vector& g, double s, Vector& out) {
  out.resize(y.size());
  const Eigen::Index n = y.size();
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = y[i] - s * g[i];
}

void extrapolate(const Vector& x, const Vector& x_prev, double a, Vector& out) {
  out.resize(x.size());
  const Eigen::Index n = x.size();
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = x[i] + a * (x[i] - x_prev[i]);
}

}  // namespace bilevel::kernels::omp
