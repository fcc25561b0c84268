#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bilevel/prox.hpp"

namespace bilevel {

/// One row of a run. NaN marks a quantity that is unavailable (no oracle).
struct TraceRecord {
  long long k = 0;
  double F_res = 0.0;
  double H_gap = 0.0;
  double dist = 0.0;
  double eps = 0.0;
  double step_norm = 0.0;
  std::optional<double> E_lambda;
  double F_value = 0.0;
  double H_value = 0.0;
};

enum class StoragePolicy { None, Full, Thinned };

const char* storage_policy_name(StoragePolicy p);

/// Per-iteration history of a solver run plus the metadata needed to
/// reproduce it.
struct RunTrace {
  std::vector<TraceRecord> records;

  StoragePolicy storage = StoragePolicy::None;
  long long thin_stride = 1;
  /// Iterate x_k for every stored k (all k for Full, multiples of
  /// thin_stride for Thinned).
  std::vector<long long> iterate_index;
  std::vector<Vector> iterates;

  std::string problem_id;
  std::string method;
  std::string config_snapshot;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;

  bool has_iterate(long long k) const;
  const Vector& iterate(long long k) const;
  /// Largest iteration index with a stored iterate (-1 when none).
  long long last_iterate_index() const;
  /// Throws StorageUnavailable unless every iterate is stored.
  void require_full_storage(const char* what) const;
};

/// Full storage below dimension * iterations = 1e7 scalars, thinned by 10
/// above.
StoragePolicy choose_storage(long long dimension, long long iterations);

}  // namespace bilevel
