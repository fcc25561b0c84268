#include "bilevel/trace.hpp"

#include <algorithm>

#include "bilevel/errors.hpp"

namespace bilevel {

const char* storage_policy_name(StoragePolicy p) {
  switch (p) {
    case StoragePolicy::None: return "none";
    case StoragePolicy::Full: return "full";
    case StoragePolicy::Thinned: return "thinned";
  }
  return "none";
}

StoragePolicy choose_storage(long long dimension, long long iterations) {
  constexpr long long kFullLimit = 10'000'000;
  return dimension * (iterations + 1) <= kFullLimit ? StoragePolicy::Full : StoragePolicy::Thinned;
}

bool RunTrace::has_iterate(long long k) const {
  return std::binary_search(iterate_index.begin(), iterate_index.end(), k);
}

const Vector& RunTrace::iterate(long long k) const {
  auto it = std::lower_bound(iterate_index.begin(), iterate_index.end(), k);
  if (it == iterate_index.end() || *it != k) {
    throw StorageUnavailable("iterate " + std::to_string(k) + " not stored in trace");
  }
  return iterates[static_cast<std::size_t>(it - iterate_index.begin())];
}

long long RunTrace::last_iterate_index() const {
  return iterate_index.empty() ? -1 : iterate_index.back();
}

void RunTrace::require_full_storage(const char* what) const {
  if (storage != StoragePolicy::Full) {
    throw StorageUnavailable(std::string(what) + " requires full iterate storage (policy: " +
                             storage_policy_name(storage) + ")");
  }
}

}  // namespace bilevel
