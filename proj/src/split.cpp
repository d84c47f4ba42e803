#include "pseudorep/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pseudorep/errors.hpp"
#include "pseudorep/random.hpp"

namespace pseudorep {
namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& d) {
  std::vector<std::vector<std::size_t>> by_class(
      static_cast<std::size_t>(d.num_classes()));
  const auto& labels = d.labels();
  for (std::size_t i = 0; i < d.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return by_class;
}

}  // namespace

Split make_split(const Dataset& dataset, const SplitSpec& spec) {
  if (!dataset.has_labels()) throw InputError("make_split needs a labeled dataset");
  if (spec.n_labeled == 0 || spec.n_test == 0) {
    throw ConfigError("n_labeled and n_test must be positive");
  }
  if (spec.n_labeled + spec.n_test >= dataset.size()) {
    throw ConfigError("n_labeled + n_test must be smaller than the dataset (" +
                      std::to_string(dataset.size()) + ")");
  }
  const auto k = static_cast<std::size_t>(dataset.num_classes());
  Rng rng(derive_seed(spec.seed, "split"));

  std::vector<char> taken(dataset.size(), 0);
  std::vector<std::size_t> labeled;
  if (spec.stratified) {
    if (spec.n_labeled % k != 0) {
      throw ConfigError("stratified split needs n_labeled divisible by num_classes (" +
                        std::to_string(spec.n_labeled) + " % " + std::to_string(k) +
                        " != 0)");
    }
    const std::size_t per_class = spec.n_labeled / k;
    for (auto& bucket : indices_by_class(dataset)) {
      if (bucket.size() < per_class) {
        throw ConfigError("class has fewer samples than the stratified quota");
      }
      std::shuffle(bucket.begin(), bucket.end(), rng);
      labeled.insert(labeled.end(), bucket.begin(), bucket.begin() + per_class);
    }
  } else {
    std::vector<std::size_t> all(dataset.size());
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    labeled.assign(all.begin(), all.begin() + spec.n_labeled);
  }
  for (auto i : labeled) taken[i] = 1;

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!taken[i]) rest.push_back(i);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  std::vector<std::size_t> test(rest.begin(), rest.begin() + spec.n_test);
  std::vector<std::size_t> unlabeled(rest.begin() + spec.n_test, rest.end());

  std::sort(labeled.begin(), labeled.end());
  std::sort(test.begin(), test.end());
  std::sort(unlabeled.begin(), unlabeled.end());

  Dataset unlabeled_with_truth = dataset.subset(unlabeled);
  Split out{dataset.subset(labeled), unlabeled_with_truth.without_labels(),
            dataset.subset(test), HiddenTruth(unlabeled_with_truth)};
  return out;
}

std::pair<Dataset, Dataset> holdout(const Dataset& dataset, double fraction,
                                    std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0) {
    throw ConfigError("holdout fraction must be in (0, 1)");
  }
  Rng rng(derive_seed(seed, "holdout"));
  std::vector<std::size_t> held;
  for (auto& bucket : indices_by_class(dataset)) {
    std::shuffle(bucket.begin(), bucket.end(), rng);
    const auto n = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(bucket.size()) + 0.5));
    // Keep at least one training sample per non-empty class.
    const std::size_t take = bucket.empty() ? 0 : std::min(n, bucket.size() - 1);
    held.insert(held.end(), bucket.begin(), bucket.begin() + take);
  }
  std::sort(held.begin(), held.end());
  std::vector<std::size_t> kept;
  std::size_t h = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (h < held.size() && held[h] == i) {
      ++h;
    } else {
      kept.push_back(i);
    }
  }
  return {dataset.subset(kept), dataset.subset(held)};
}

Dataset stratified_fraction(const Dataset& dataset, double fraction,
                            std::uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw ConfigError("subset fraction must be in (0, 1]");
  }
  Rng rng(derive_seed(seed, "fraction"));
  std::vector<std::size_t> chosen;
  for (auto& bucket : indices_by_class(dataset)) {
    std::shuffle(bucket.begin(), bucket.end(), rng);
    auto n = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(bucket.size()) + 0.5));
    if (n == 0 && !bucket.empty()) n = 1;
    chosen.insert(chosen.end(), bucket.begin(), bucket.begin() + n);
  }
  std::sort(chosen.begin(), chosen.end());
  return dataset.subset(chosen);
}

}  // namespace pseudorep
