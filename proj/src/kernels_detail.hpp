#pragma once

#include <cmath>

#include "bilevel/kernels.hpp"

// Per-entry bodies shared by the serial and OpenMP kernels.

namespace bilevel::kernels::detail {

inline double row_dot(const RowMatrix& a, Eigen::Index row, const Vector& x) {
  return a.row(row).dot(x.transpose());
}

inline double chain_entry(const Vector& x, Eigen::Index active, Eigen::Index j) {
  if (j >= active) return 0.0;
  double g = j == 0 ? x[0] - 1.0 : 0.0;
  if (j > 0) g += x[j] - x[j - 1];
  if (j + 1 < active) g += x[j] - x[j + 1];
  return g;
}

inline void logistic_entry(double z, double y, double& loss, double& residual) {
  // log(1 + e^z) without overflow; sigmoid from the matching branch.
  if (z > 0.0) {
    const double e = std::exp(-z);
    loss = z + std::log1p(e) - y * z;
    residual = 1.0 / (1.0 + e) - y;
  } else {
    const double e = std::exp(z);
    loss = std::log1p(e) - y * z;
    residual = e / (1.0 + e) - y;
  }
}

}  // namespace bilevel::kernels::detail
