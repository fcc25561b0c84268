#pragma once

#include <cstdint>
#include <functional>

#include "bilevel/prox.hpp"

namespace bilevel {

struct PowerIterationResult {
  double eigenvalue = 0.0;
  Vector eigenvector;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of a symmetric positive semidefinite operator given by
/// its action. Stops once successive Rayleigh quotients agree to `tol`
/// (relative). The start vector is drawn from `seed`.
PowerIterationResult power_iteration(const std::function<Vector(const Vector&)>& apply,
                                     Eigen::Index dim, double tol = 1e-13,
                                     std::size_t max_iter = 1000000, std::uint64_t seed = 7);

/// Lipschitz constant of grad f for a quadratic f with Hessian-vector product
/// `hess`, i.e. the largest Hessian eigenvalue.
double quadratic_lipschitz(const std::function<Vector(const Vector&)>& hess, Eigen::Index dim);

}  // namespace bilevel
