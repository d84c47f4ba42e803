#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "pseudorep/errors.hpp"
#include "pseudorep/pool.hpp"

namespace pseudorep {

std::string to_string(Origin origin) { return origin == Origin::Seed ? "seed" : "pseudo"; }

std::size_t PoolState::pseudo_count() const {
  return static_cast<std::size_t>(
      std::count_if(provenance.begin(), provenance.end(),
                    [](const Provenance& p) { return p.origin == Origin::Pseudo; }));
}

std::size_t PoolState::root_count() const {
  std::unordered_set<SampleId, SampleIdHash> roots;
  for (const auto& p : provenance) roots.insert(p.root);
  return roots.size() + unlabeled.size();
}

PoolState make_pool_state(Dataset labeled, Dataset unlabeled) {
  PoolState s;
  s.provenance.reserve(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    s.provenance.push_back({Origin::Seed, 0, std::nullopt, labeled.parent(i)});
  }
  s.labeled = std::move(labeled);
  s.unlabeled = std::move(unlabeled);
  check_pool_invariants(s);
  return s;
}

void check_pool_invariants(const PoolState& state) {
  if (state.provenance.size() != state.labeled.size()) {
    throw ConsistencyError("pool: provenance does not cover the labeled pool");
  }
  if (!state.labeled.empty() && !state.labeled.has_labels()) {
    throw ConsistencyError("pool: labeled pool has no labels");
  }
  if (state.unlabeled.has_labels()) throw ConsistencyError("pool: unlabeled pool carries labels");
  std::unordered_set<SampleId, SampleIdHash> labeled(state.labeled.ids().begin(),
                                                     state.labeled.ids().end());
  std::unordered_set<SampleId, SampleIdHash> roots;
  for (const auto& p : state.provenance) roots.insert(p.root);
  for (SampleId id : state.unlabeled.ids()) {
    if (labeled.count(id) || roots.count(id)) {
      throw ConsistencyError("pool: sample " + std::to_string(id.value) +
                             " is both labeled and unlabeled");
    }
  }
  for (const auto& p : state.provenance) {
    if (p.origin == Origin::Pseudo && !p.confidence) {
      throw ConsistencyError("pool: pseudo sample without a selection confidence");
    }
  }
}

PoolState apply_selection(const PoolState& state, const SelectionRecord& selection,
                          const AugmentationSpec* augmentation) {
  const auto chosen = selection.flattened();
  if (chosen.empty()) {
    PoolState same = state;
    return same;
  }
  std::unordered_map<SampleId, std::size_t, SampleIdHash> row_of;
  for (std::size_t i = 0; i < state.unlabeled.size(); ++i) row_of.emplace(state.unlabeled.id(i), i);

  std::vector<std::size_t> rows;
  std::vector<int> labels;
  std::vector<bool> taken(state.unlabeled.size(), false);
  rows.reserve(chosen.size());
  for (const auto& s : chosen) {
    const auto it = row_of.find(s.id);
    if (it == row_of.end() || taken[it->second]) {
      throw ConsistencyError("apply_selection: sample " + std::to_string(s.id.value) +
                             " is not in the unlabeled pool");
    }
    taken[it->second] = true;
    rows.push_back(it->second);
    labels.push_back(s.label);
  }
  std::vector<std::size_t> rest;
  rest.reserve(state.unlabeled.size() - rows.size());
  for (std::size_t i = 0; i < taken.size(); ++i) {
    if (!taken[i]) rest.push_back(i);
  }

  Dataset promoted = state.unlabeled.subset(rows).with_labels(labels);
  std::vector<Provenance> added;
  for (const auto& s : chosen) {
    added.push_back({Origin::Pseudo, selection.iteration, s.confidence, s.id});
  }
  if (augmentation && augmentation->k > 0) {
    AugmentationSpec spec = *augmentation;
    spec.include_original = true;
    spec.seed = derive_seed(augmentation->seed, selection.iteration);
    promoted = augment(promoted, spec);
    std::unordered_map<SampleId, Provenance, SampleIdHash> by_root;
    for (const auto& p : added) by_root.emplace(p.root, p);
    added.clear();
    for (std::size_t i = 0; i < promoted.size(); ++i) added.push_back(by_root.at(promoted.parent(i)));
  }

  PoolState next;
  next.labeled = Dataset::concat(state.labeled, promoted);
  next.provenance = state.provenance;
  next.provenance.insert(next.provenance.end(), added.begin(), added.end());
  next.unlabeled = state.unlabeled.subset(rest);
  next.iteration = state.iteration;
  return next;
}

}  // namespace pseudorep
