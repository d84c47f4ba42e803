#pragma once

#include <cstdint>

#include "pseudorep/dataset.hpp"

namespace pseudorep {

struct SplitSpec {
  std::size_t n_labeled = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
};

/// Three pairwise-disjoint pools. `unlabeled` carries no labels; its ground
/// truth lives in `unlabeled_truth` for evaluation only.
struct Split {
  Dataset labeled;
  Dataset unlabeled;
  Dataset test;
  HiddenTruth unlabeled_truth;
};

/// Random labeled / unlabeled / test partition of a fully labeled dataset.
/// Stratified splits draw n_labeled / num_classes samples from every class
/// (n_labeled must divide evenly). The test pool is drawn from the remainder
/// and the rest becomes unlabeled. Pools keep the input order.
Split make_split(const Dataset& dataset, const SplitSpec& spec);

/// Stratified (when possible) holdout of `fraction` of `dataset`, returned as
/// {kept, held_out}. Used to carve a validation set from seed labels.
std::pair<Dataset, Dataset> holdout(const Dataset& dataset, double fraction,
                                    std::uint64_t seed);

/// Random subset of `fraction` of the samples, stratified by class.
Dataset stratified_fraction(const Dataset& dataset, double fraction,
                            std::uint64_t seed);

}  // namespace pseudorep
