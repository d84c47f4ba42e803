#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pseudorep/augment.hpp"
#include "pseudorep/dataset.hpp"
#include "pseudorep/models.hpp"

namespace pseudorep {

enum class Origin { Seed, Pseudo };

std::string to_string(Origin origin);

struct Provenance {
  Origin origin = Origin::Seed;
  std::size_t iteration_added = 0;
  /// Selection confidence; absent for seed samples.
  std::optional<double> confidence;
  /// Root sample (augmented copies point at their original).
  SampleId root;
};

/// Labeled and unlabeled pools of one loop run. `provenance[i]` describes
/// `labeled` row i.
struct PoolState {
  Dataset labeled;
  std::vector<Provenance> provenance;
  Dataset unlabeled;
  std::size_t iteration = 0;

  std::size_t pseudo_count() const;
  /// Distinct root ids in the labeled pool plus the unlabeled pool size.
  std::size_t root_count() const;
};

/// Seed pool (possibly augmented; parents give the roots) and unlabeled pool.
PoolState make_pool_state(Dataset labeled, Dataset unlabeled);

/// Throws ConsistencyError when the pools share ids or a provenance record
/// is missing.
void check_pool_invariants(const PoolState& state);

struct SelectedSample {
  SampleId id;
  int label = 0;
  double confidence = 0.0;
};

struct SelectionRecord {
  std::size_t iteration = 0;
  std::size_t quota = 0;
  /// per_class[c]: samples argmaxed to class c, by descending confidence
  /// (ascending id on ties).
  std::vector<std::vector<SelectedSample>> per_class;
  /// quota minus the number selected, per class.
  std::vector<std::size_t> shortfall;

  std::size_t size() const;
  std::vector<SelectedSample> flattened() const;
};

/// q = floor(alpha * n_per_class); throws ConfigError when q == 0.
std::size_t selection_quota(double alpha, std::size_t n_per_class);

/// Buckets rows by argmax class and keeps the top q of each bucket by
/// confidence. Ties on confidence go to the smaller id.
SelectionRecord select_per_class(const FloatMatrix& proba, std::span<const SampleId> ids,
                                 double alpha, std::size_t n_per_class, ConfidenceMetric metric);

/// Moves the selected samples from the unlabeled to the labeled pool with
/// their pseudo labels. When `augmentation` is given, k augmented copies of
/// every promoted sample join as well. Throws ConsistencyError if an id is
/// not currently unlabeled.
PoolState apply_selection(const PoolState& state, const SelectionRecord& selection,
                          const AugmentationSpec* augmentation = nullptr);

}  // namespace pseudorep
