#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bilevel/core.hpp"
#include "bilevel/kernels.hpp"

namespace bilevel {

// ---------------------------------------------------------------- Nemirovsky

/// f(x) = 1/2 (x_1 - 1)^2 + 1/2 sum_{j=2}^{J} (x_{j-1} - x_j)^2,
/// H(x) = ||x - xhat||_1 with xhat = (xhat_value, ..., xhat_value).
struct NemirovskySpec {
  Eigen::Index d = 200;
  Eigen::Index J = 100;
  double xhat_value = 50.0;

  void validate() const;
};

/// Largest eigenvalue of the inner Hessian by power iteration (< 4 always).
double nemirovsky_lipschitz(const NemirovskySpec& spec);
/// Smallest eigenvalue of the active J x J Hessian block,
/// 4 sin^2(pi / (2 (2J + 1))); the quadratic growth modulus tau.
double nemirovsky_growth_modulus(Eigen::Index J);

BilevelProblem make_nemirovsky(const NemirovskySpec& spec,
                               kernels::Backend backend = kernels::Backend::Parallel);

// ------------------------------------------------------------- min-norm toy

/// f(x) = 1/2 ||Ax - b||^2, h(x) = 1/2 ||x||^2. Requires full row rank.
BilevelProblem make_min_norm_problem(const Eigen::MatrixXd& A, const Vector& b,
                                     std::string id = "min_norm");

/// Gaussian A (m x d, m < d) scaled to spectral norm 1 and b = A z, both drawn
/// from `seed`. Resamples A up to 10 times before raising RankDeficient.
BilevelProblem make_min_norm_toy(Eigen::Index m, Eigen::Index d, std::uint64_t seed);

/// A and b of the toy instance above (same draws).
struct MinNormData {
  Eigen::MatrixXd A;
  Vector b;
};
MinNormData min_norm_toy_data(Eigen::Index m, Eigen::Index d, std::uint64_t seed);

// ------------------------------------------------------------------- dataset

struct Dataset {
  Eigen::MatrixXd features;
  Vector labels;
  std::vector<std::string> header;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
};

/// CSV with a header row; the last column is a {0, 1} label.
Dataset load_dataset_csv(const std::filesystem::path& path);
/// First n rows.
Dataset take_rows(const Dataset& ds, Eigen::Index n);
/// Gaussian features with labels drawn from a logistic model.
Dataset synthetic_dataset(Eigen::Index n, Eigen::Index p, std::uint64_t seed);

/// $BILEVEL_DATA_DIR if set, else the data directory of the source tree.
std::filesystem::path data_dir();
inline constexpr Eigen::Index kBreastCancerTrainRows = 455;
/// Bundled Wisconsin breast cancer snapshot, first 455 rows.
Dataset load_breast_cancer_train();

// ------------------------------------------------------------------ logistic

struct LogisticLiftSpec {
  /// 0 means "take from the dataset"; otherwise must match it.
  Eigen::Index raw_features = 0;
  int lift_degree = 3;
  /// 0 means all rows; otherwise the first n_samples rows.
  Eigen::Index n_samples = 0;
  bool standardize = true;
  Eigen::Index dimension_cap = 6000;
};

/// C(p + degree, degree).
Eigen::Index lifted_dimension(Eigen::Index p, int degree);
/// Column-wise zero mean and unit (population) variance; constant columns are
/// only centered.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x);
/// All monomials of total degree <= degree: the constant 1, then degree 1,
/// 2, ... blocks, each in lexicographic order of nondecreasing index tuples
/// (a1 a1, a1 a2, ..., a1 ap, a2 a2, ...).
kernels::RowMatrix lift_features(const Eigen::MatrixXd& x, int degree);

/// f(x) = (1/n) sum log(1 + e^{a_i.x}) - y_i a_i.x over lifted rows a_i,
/// H(x) = ||x||_1. The oracle is left empty; see attach_reference_oracle.
BilevelProblem make_logistic_lifted(const Dataset& ds, const LogisticLiftSpec& spec,
                                    kernels::Backend backend = kernels::Backend::Parallel);

struct ReferenceSpec {
  long long iterations = 200000;
  Schedule schedule;
  double alpha = 4.0;
  double gamma = 1.0;
  double step_fraction = 0.95;
};

struct ReferenceValues {
  double min_inner = 0.0;
  double min_outer = 0.0;
  long long iterations = 0;
};

/// Long reference runs: FISTA on F alone (eps = 0) for min_inner and BFPG with
/// `spec.schedule` for the outer value. min_inner is the lowest F seen in
/// either run.
ReferenceValues compute_reference(const BilevelProblem& prob, const ReferenceSpec& spec);
/// Installs reference values as an inexact oracle (no x*, no Holder data).
void attach_reference_oracle(BilevelProblem& prob, const ReferenceValues& ref);

}  // namespace bilevel
