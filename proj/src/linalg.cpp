#include "bilevel/linalg.hpp"

#include <cmath>
#include <random>

#include "bilevel/errors.hpp"

namespace bilevel {

PowerIterationResult power_iteration(const std::function<Vector(const Vector&)>& apply,
                                     Eigen::Index dim, double tol, std::size_t max_iter,
                                     std::uint64_t seed) {
  if (dim <= 0) throw ValidationError("dim", "must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = unif(rng);
  v.normalize();

  PowerIterationResult out;
  double previous = 0.0;
  // Two consecutive small changes guard against a stall at a lucky iterate.
  int calm = 0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Vector w = apply(v);
    const double rayleigh = v.dot(w);
    const double norm = w.norm();
    out.iterations = it;
    out.eigenvalue = rayleigh;
    if (norm == 0.0) {
      out.eigenvector = v;
      out.converged = true;
      return out;
    }
    v = w / norm;
    if (it > 1 && std::abs(rayleigh - previous) <= tol * std::abs(rayleigh)) {
      if (++calm >= 2) {
        out.converged = true;
        break;
      }
    } else {
      calm = 0;
    }
    previous = rayleigh;
  }
  out.eigenvector = v;
  return out;
}

double quadratic_lipschitz(const std::function<Vector(const Vector&)>& hess, Eigen::Index dim) {
  return power_iteration(hess, dim).eigenvalue;
}

}  // namespace bilevel
