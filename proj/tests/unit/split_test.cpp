#include <gtest/gtest.h>

#include <set>

#include "pseudorep/errors.hpp"
#include "pseudorep/generators.hpp"
#include "pseudorep/split.hpp"
#include "support.hpp"

namespace pseudorep {
namespace {

std::set<std::uint64_t> id_set(const Dataset& d) {
  std::set<std::uint64_t> s;
  for (auto id : d.ids()) s.insert(id.value);
  return s;
}

TEST(Split, PoolsArePairwiseDisjointAndCoverTheDataset) {
  const Dataset d = gen_synthetic_classes(5, 40, 8, 0.5, 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Split s = make_split(d, {25, 30, seed, true});
    EXPECT_EQ(s.labeled.size(), 25u);
    EXPECT_EQ(s.test.size(), 30u);
    EXPECT_EQ(s.unlabeled.size(), d.size() - 55);
    EXPECT_FALSE(s.unlabeled.has_labels());
    auto a = id_set(s.labeled), b = id_set(s.unlabeled), c = id_set(s.test);
    std::set<std::uint64_t> all;
    all.insert(a.begin(), a.end());
    all.insert(b.begin(), b.end());
    all.insert(c.begin(), c.end());
    EXPECT_EQ(all.size(), d.size());
    EXPECT_EQ(s.labeled.class_counts(), std::vector<std::size_t>(5, 5));
    EXPECT_EQ(s.unlabeled_truth.size(), s.unlabeled.size());
  }
}

TEST(Split, HiddenTruthMatchesSourceLabels) {
  const Dataset d = gen_synthetic_classes(3, 20, 8, 0.5, 2);
  const Split s = make_split(d, {9, 9, 4, true});
  for (auto id : s.unlabeled.ids()) {
    const auto y = s.unlabeled_truth.lookup(id);
    ASSERT_TRUE(y);
    EXPECT_EQ(*y, d.label(id.value));
  }
}

TEST(Split, DeterministicInSeed) {
  const Dataset d = gen_synthetic_classes(3, 20, 8, 0.5, 2);
  EXPECT_EQ(make_split(d, {9, 9, 4, true}).labeled.ids(), make_split(d, {9, 9, 4, true}).labeled.ids());
  EXPECT_NE(make_split(d, {9, 9, 4, true}).labeled.ids(), make_split(d, {9, 9, 5, true}).labeled.ids());
}

TEST(Split, RejectsInvalidSizes) {
  const Dataset d = gen_synthetic_classes(3, 10, 8, 0.5, 2);
  EXPECT_THROW(make_split(d, {0, 3, 0, true}), ConfigError);
  EXPECT_THROW(make_split(d, {15, 15, 0, true}), ConfigError);
  EXPECT_THROW(make_split(d, {4, 3, 0, true}), ConfigError);
  EXPECT_NO_THROW(make_split(d, {4, 3, 0, false}));
  EXPECT_THROW(make_split(d.without_labels(), {3, 3, 0, true}), InputError);
}

TEST(Holdout, StratifiedAndKeepsOnePerClass) {
  const Dataset d = testing::random_vectors(50, 3, 5, 1);
  const auto [kept, held] = holdout(d, 0.2, 3);
  EXPECT_EQ(held.size(), 10u);
  EXPECT_EQ(held.class_counts(), std::vector<std::size_t>(5, 2));
  EXPECT_EQ(kept.size() + held.size(), d.size());
  const Dataset pairs = testing::random_vectors(4, 3, 4, 1);
  const auto [k2, h2] = holdout(pairs, 0.9, 3);
  EXPECT_EQ(k2.class_counts(), std::vector<std::size_t>(4, 1));
  EXPECT_THROW(holdout(d, 0.0, 1), ConfigError);
  EXPECT_THROW(holdout(d, 1.0, 1), ConfigError);
}

TEST(StratifiedFraction, TakesTheFractionOfEveryClass) {
  const Dataset d = testing::random_vectors(300, 2, 3, 1);
  const Dataset s = stratified_fraction(d, 0.1, 9);
  EXPECT_EQ(s.class_counts(), std::vector<std::size_t>(3, 10));
  const Dataset one = stratified_fraction(testing::random_vectors(6, 2, 3, 1), 0.01, 1);
  EXPECT_EQ(one.class_counts(), std::vector<std::size_t>(3, 1));
  EXPECT_EQ(stratified_fraction(d, 1.0, 2).size(), d.size());
  EXPECT_THROW(stratified_fraction(d, 0.0, 1), ConfigError);
}

}  // namespace
}  // namespace pseudorep
