#pragma once

#include <Eigen/Dense>

#include "bilevel/prox.hpp"

// Data-parallel inner loops used by the shipped problems and solvers.
//
// Every kernel exists twice: `serial::` is the reference implementation and
// `omp::` the OpenMP version. Parallel kernels only split independent output
// entries across threads; each entry is computed by the same per-entry code
// as the serial version, so both produce bit-identical results for any thread
// count. Reductions (norms, objective sums) stay serial for the same reason.

namespace bilevel::kernels {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Backend { Serial, Parallel };

const char* backend_name(Backend b);
/// Number of OpenMP threads the parallel kernels would use (1 without OpenMP).
int parallel_threads();

namespace serial {
/// y = A x.
void gemv(const RowMatrix& a, const Vector& x, Vector& y);
/// Gradient of 1/2 (x_0 - 1)^2 + 1/2 sum_{j<active} (x_{j-1} - x_j)^2.
void chain_gradient(const Vector& x, Eigen::Index active, Vector& g);
/// loss_i = log(1 + e^{z_i}) - y_i z_i and residual_i = sigmoid(z_i) - y_i.
void logistic_terms(const Vector& z, const Vector& labels, Vector& loss, Vector& residual);
/// out = y - s g.
void gradient_step(const Vector& y, const Vector& g, double s, Vector& out);
/// out = x + a (x - x_prev).
void extrapolate(const Vector& x, const Vector& x_prev, double a, Vector& out);
}  // namespace serial

namespace omp {
void gemv(const RowMatrix& a, const Vector& x, Vector& y);
void chain_gradient(const Vector& x, Eigen::Index active, Vector& g);
void logistic_terms(const Vector& z, const Vector& labels, Vector& loss, Vector& residual);
void gradient_step(const Vector& y, const Vector& g, double s, Vector& out);
void extrapolate(const Vector& x, const Vector& x_prev, double a, Vector& out);
}  // namespace omp

inline void gemv(Backend b, const RowMatrix& a, const Vector& x, Vector& y) {
  b == Backend::Parallel ? omp::gemv(a, x, y) : serial::gemv(a, x, y);
}
inline void chain_gradient(Backend b, const Vector& x, Eigen::Index active, Vector& g) {
  b == Backend::Parallel ? omp::chain_gradient(x, active, g) : serial::chain_gradient(x, active, g);
}
inline void logistic_terms(Backend b, const Vector& z, const Vector& labels, Vector& loss,
                           Vector& residual) {
  b == Backend::Parallel ? omp::logistic_terms(z, labels, loss, residual)
                         : serial::logistic_terms(z, labels, loss, residual);
}
inline void gradient_step(Backend b, const Vector& y, const Vector& g, double s, Vector& out) {
  b == Backend::Parallel ? omp::gradient_step(y, g, s, out) : serial::gradient_step(y, g, s, out);
}
inline void extrapolate(Backend b, const Vector& x, const Vector& x_prev, double a, Vector& out) {
  b == Backend::Parallel ? omp::extrapolate(x, x_prev, a, out)
                         : serial::extrapolate(x, x_prev, a, out);
}

/// Sum of a vector in index order (deterministic reduction).
double ordered_sum(const Vector& v);

}  // namespace bilevel::kernels
