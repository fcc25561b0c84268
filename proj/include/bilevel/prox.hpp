#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bilevel {

using Vector = Eigen::VectorXd;

/// Extended-real +infinity used for indicator functions.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Per-coordinate description of a separable convex function
///
///   phi_i(y) = sum_j w_j |y - a_ji| + (q / 2) y^2 + iota_[lo_i, hi_i](y).
///
/// Vectors of size 1 are broadcast across coordinates; empty centers mean 0.
struct SeparableForm {
  struct AbsTerm {
    double weight = 1.0;
    Vector center;
  };

  std::vector<AbsTerm> abs_terms;
  double quad = 0.0;
  std::optional<Vector> lower;
  std::optional<Vector> upper;

  /// this + scale * other. Box constraints intersect (scale must be > 0).
  SeparableForm combined_with(const SeparableForm& other, double scale) const;

  double eval(const Vector& x) const;
  /// Exact prox_{s phi}(v) by a breakpoint search on each coordinate.
  Vector prox(double s, const Vector& v) const;
};

/// Proper convex lsc function given by value and prox oracles.
class ProxTerm {
 public:
  using EvalFn = std::function<double(const Vector&)>;
  using ProxFn = std::function<Vector(double, const Vector&)>;

  ProxTerm();
  ProxTerm(std::string name, EvalFn eval, ProxFn prox,
           std::optional<SeparableForm> separable = std::nullopt);

  static ProxTerm zero();
  /// weight ||x||_1.
  static ProxTerm l1(double weight = 1.0);
  /// weight ||x - center||_1.
  static ProxTerm shifted_l1(Vector center, double weight = 1.0);
  /// Indicator of the box [lower, upper] (size-1 bounds broadcast).
  static ProxTerm box(Vector lower, Vector upper);
  /// (weight / 2) ||x||^2.
  static ProxTerm squared_norm(double weight = 1.0);

  double eval(const Vector& x) const { return eval_(x); }
  Vector prox(double s, const Vector& v) const { return prox_(s, v); }

  bool is_zero() const { return is_zero_; }
  const std::string& name() const { return name_; }
  const std::optional<SeparableForm>& separable() const { return separable_; }

 private:
  std::string name_;
  EvalFn eval_;
  ProxFn prox_;
  std::optional<SeparableForm> separable_;
  bool is_zero_ = false;
};

/// sign(v) max(|v| - t, 0), coordinatewise.
Vector soft_threshold(const Vector& v, double t);

}  // namespace bilevel
