#include "bilevel/prox.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "bilevel/errors.hpp"

namespace bilevel {

namespace {

double at(const Vector& v, Eigen::Index i) {
  if (v.size() == 0) return 0.0;
  return v.size() == 1 ? v[0] : v[i];
}

Vector broadcast_min(const Vector& a, const Vector& b) {
  if (a.size() == 1 && b.size() == 1) return Vector::Constant(1, std::min(a[0], b[0]));
  const Eigen::Index n = std::max(a.size(), b.size());
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = std::min(at(a, i), at(b, i));
  return out;
}

Vector broadcast_max(const Vector& a, const Vector& b) {
  if (a.size() == 1 && b.size() == 1) return Vector::Constant(1, std::max(a[0], b[0]));
  const Eigen::Index n = std::max(a.size(), b.size());
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = std::max(at(a, i), at(b, i));
  return out;
}

}  // namespace

Vector soft_threshold(const Vector& v, double t) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - t;
    out[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
  }
  return out;
}

SeparableForm SeparableForm::combined_with(const SeparableForm& other, double scale) const {
  SeparableForm out = *this;
  for (const auto& term : other.abs_terms) {
    out.abs_terms.push_back({scale * term.weight, term.center});
  }
  out.quad += scale * other.quad;
  if (other.lower) out.lower = out.lower ? broadcast_max(*out.lower, *other.lower) : *other.lower;
  if (other.upper) out.upper = out.upper ? broadcast_min(*out.upper, *other.upper) : *other.upper;
  return out;
}

double SeparableForm::eval(const Vector& x) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (lower && x[i] < at(*lower, i)) return kInfinity;
    if (upper && x[i] > at(*upper, i)) return kInfinity;
    for (const auto& term : abs_terms) total += term.weight * std::abs(x[i] - at(term.center, i));
  }
  if (quad != 0.0) total += 0.5 * quad * x.squaredNorm();
  return total;
}

Vector SeparableForm::prox(double s, const Vector& v) const {
  const double kappa = 1.0 + s * quad;
  std::vector<std::pair<double, double>> knots(abs_terms.size());
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Stationarity of kappa y - v + s sum_j w_j sign(y - a_j); the slope sum
    // starts at -W left of every knot and gains 2 w_j crossing knot j.
    double slope = 0.0;
    for (std::size_t j = 0; j < abs_terms.size(); ++j) {
      knots[j] = {at(abs_terms[j].center, i), abs_terms[j].weight};
      slope -= abs_terms[j].weight;
    }
    std::sort(knots.begin(), knots.end());
    double y = 0.0;
    bool found = false;
    double left = -kInfinity;
    for (std::size_t j = 0; j <= knots.size() && !found; ++j) {
      const double right = j < knots.size() ? knots[j].first : kInfinity;
      const double candidate = (v[i] - s * slope) / kappa;
      if (candidate > left && candidate < right) {
        y = candidate;
        found = true;
        break;
      }
      if (j == knots.size()) break;
      const double lo_deriv = kappa * right - v[i] + s * slope;
      const double hi_deriv = lo_deriv + 2.0 * s * knots[j].second;
      if (lo_deriv <= 0.0 && hi_deriv >= 0.0) {
        y = right;
        found = true;
      }
      slope += 2.0 * knots[j].second;
      left = right;
    }
    if (lower) y = std::max(y, at(*lower, i));
    if (upper) y = std::min(y, at(*upper, i));
    out[i] = y;
  }
  return out;
}

ProxTerm::ProxTerm() : ProxTerm(zero()) {}

ProxTerm::ProxTerm(std::string name, EvalFn eval, ProxFn prox,
                   std::optional<SeparableForm> separable)
    : name_(std::move(name)),
      eval_(std::move(eval)),
      prox_(std::move(prox)),
      separable_(std::move(separable)) {}

ProxTerm ProxTerm::zero() {
  ProxTerm t("zero", [](const Vector&) { return 0.0; },
             [](double, const Vector& v) { return Vector(v); }, SeparableForm{});
  t.is_zero_ = true;
  return t;
}

ProxTerm ProxTerm::l1(double weight) {
  if (!(weight > 0.0)) throw ValidationError("weight", "l1 weight must be positive");
  SeparableForm form;
  form.abs_terms.push_back({weight, Vector()});
  return ProxTerm(
      "l1", [weight](const Vector& x) { return weight * x.lpNorm<1>(); },
      [weight](double s, const Vector& v) { return soft_threshold(v, s * weight); }, form);
}

ProxTerm ProxTerm::shifted_l1(Vector center, double weight) {
  if (!(weight > 0.0)) throw ValidationError("weight", "l1 weight must be positive");
  SeparableForm form;
  form.abs_terms.push_back({weight, center});
  auto eval = [center, weight](const Vector& x) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) total += std::abs(x[i] - at(center, i));
    return weight * total;
  };
  auto prox = [center, weight](double s, const Vector& v) {
    const double t = s * weight;
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double c = at(center, i);
      const double a = std::abs(v[i] - c) - t;
      out[i] = a > 0.0 ? c + std::copysign(a, v[i] - c) : c;
    }
    return out;
  };
  return ProxTerm("shifted_l1", eval, prox, form);
}

ProxTerm ProxTerm::box(Vector lower, Vector upper) {
  const Eigen::Index n = std::max(lower.size(), upper.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(at(lower, i) <= at(upper, i))) throw ValidationError("box", "lower bound exceeds upper bound");
  }
  SeparableForm form;
  form.lower = lower;
  form.upper = upper;
  auto eval = [lower, upper](const Vector& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < at(lower, i) || x[i] > at(upper, i)) return kInfinity;
    }
    return 0.0;
  };
  auto prox = [lower, upper](double, const Vector& v) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out[i] = std::clamp(v[i], at(lower, i), at(upper, i));
    }
    return out;
  };
  return ProxTerm("box", eval, prox, form);
}

ProxTerm ProxTerm::squared_norm(double weight) {
  if (!(weight > 0.0)) throw ValidationError("weight", "squared norm weight must be positive");
  SeparableForm form;
  form.quad = weight;
  return ProxTerm(
      "squared_norm", [weight](const Vector& x) { return 0.5 * weight * x.squaredNorm(); },
      [weight](double s, const Vector& v) { return Vector(v / (1.0 + s * weight)); }, form);
}

}  // namespace bilevel
