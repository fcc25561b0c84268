#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "bilevel/core.hpp"
#include "bilevel/problems.hpp"

namespace testing_support {

using bilevel::Vector;

/// 1-D f = x^2 / 2, h = (x - 1)^2 / 2, no nonsmooth parts.
inline bilevel::BilevelProblem scalar_quadratics() {
  bilevel::BilevelProblem p;
  p.id = "scalar";
  p.dimension = 1;
  p.inner.smooth = bilevel::SmoothTerm(
      [](const Vector& x) { return 0.5 * x.squaredNorm(); }, [](const Vector& x) { return Vector(x); }, 1.0);
  p.outer.smooth = bilevel::SmoothTerm(
      [](const Vector& x) { return 0.5 * (x.array() - 1.0).square().sum(); },
      [](const Vector& x) { return Vector(x.array() - 1.0); }, 1.0);
  return p;
}

/// F = x1^2 / 2, H = ||x||^2 / 2 on R^2, x* = 0.
inline bilevel::BilevelProblem planar_toy() {
  Eigen::MatrixXd A(1, 2);
  A << 1.0, 0.0;
  return bilevel::make_min_norm_problem(A, Vector::Zero(1), "planar_toy");
}

inline Vector gaussian(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bilevel_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
