#include "kernels_detail.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bilevel::kernels {

const char* backend_name(Backend b) { return b == Backend::Parallel ? "parallel" : "serial"; }

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double ordered_sum(const Vector& v) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) total += v[i];
  return total;
}

namespace serial {

void gemv(const RowMatrix& a, const Vector& x, Vector& y) {
  y.resize(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) y[i] = detail::row_dot(a, i, x);
}

void chain_gradient(const Vector& x, Eigen::Index active, Vector& g) {
  g.resize(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) g[j] = detail::chain_entry(x, active, j);
}

void logistic_terms(const Vector& z, const Vector& labels, Vector& loss, Vector& residual) {
  loss.resize(z.size());
  residual.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    detail::logistic_entry(z[i], labels[i], loss[i], residual[i]);
  }
}

void gradient_step(const Vector& y, const Vector& g, double s, Vector& out) {
  out.resize(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = y[i] - s * g[i];
}

void extrapolate(const Vector& x, const Vector& x_prev, double a, Vector& out) {
  out.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = x[i] + a * (x[i] - x_prev[i]);
}

}  // namespace serial
}  // namespace bilevel::kernels
