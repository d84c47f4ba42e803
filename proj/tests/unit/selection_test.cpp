#include <gtest/gtest.h>

#include "pseudorep/errors.hpp"
#include "pseudorep/pool.hpp"
#include "support.hpp"

namespace pseudorep {
namespace {

std::vector<SampleId> shuffled_ids(std::size_t n, std::mt19937_64& rng) {
  std::vector<SampleId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = SampleId{1000 + 7 * i};
  std::shuffle(ids.begin(), ids.end(), rng);
  return ids;
}

TEST(SelectionQuota, FloorOfAlphaTimesN) {
  EXPECT_EQ(selection_quota(0.25, 45), 11u);
  EXPECT_EQ(selection_quota(1.0, 15), 15u);
  EXPECT_EQ(selection_quota(0.1, 15), 1u);
  EXPECT_EQ(selection_quota(2.5, 4), 10u);
  EXPECT_THROW(selection_quota(0.05, 15), ConfigError);
  EXPECT_THROW(selection_quota(0.0, 15), ConfigError);
  EXPECT_THROW(selection_quota(-1.0, 15), ConfigError);
}

TEST(SelectPerClass, MatchesBruteForceOracle) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> rows(1, 200), cols(2, 7);
  std::uniform_real_distribution<double> alpha(0.1, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rows(rng), k = cols(rng);
    const bool coarse = trial % 2 == 1;
    const FloatMatrix p = testing::selection_case(n, k, coarse, rng);
    const auto ids = shuffled_ids(n, rng);
    const double a = alpha(rng);
    const std::size_t npc = 10;
    const bool ne = trial % 3 == 0;
    const auto got = select_per_class(p, ids, a, npc,
                                      ne ? ConfidenceMetric::NegEntropy : ConfidenceMetric::MaxProb);
    const std::size_t q = selection_quota(a, npc);
    const auto want = testing::brute_force_selection(p, ids, q, ne);
    ASSERT_EQ(got.per_class.size(), k);
    for (std::size_t c = 0; c < k; ++c) {
      ASSERT_EQ(got.per_class[c].size(), want[c].size()) << "trial " << trial << " class " << c;
      EXPECT_EQ(got.shortfall[c], q - want[c].size());
      for (std::size_t i = 0; i < want[c].size(); ++i) {
        EXPECT_EQ(got.per_class[c][i].id.value, want[c][i].first);
        EXPECT_EQ(got.per_class[c][i].confidence, want[c][i].second);
        EXPECT_EQ(got.per_class[c][i].label, static_cast<int>(c));
      }
    }
  }
}

TEST(SelectPerClass, PerClassCapAndShortfall) {
  FloatMatrix p(5, 3);
  p << 0.9f, 0.05f, 0.05f,  //
      0.8f, 0.1f, 0.1f,     //
      0.7f, 0.2f, 0.1f,     //
      0.1f, 0.8f, 0.1f,     //
      0.6f, 0.3f, 0.1f;
  const std::vector<SampleId> ids{SampleId{5}, SampleId{4}, SampleId{3}, SampleId{2}, SampleId{1}};
  const auto r = select_per_class(p, ids, 0.5, 4, ConfidenceMetric::MaxProb);
  EXPECT_EQ(r.quota, 2u);
  ASSERT_EQ(r.per_class[0].size(), 2u);
  EXPECT_EQ(r.per_class[0][0].id, SampleId{5});
  EXPECT_EQ(r.per_class[0][1].id, SampleId{4});
  EXPECT_EQ(r.per_class[1].size(), 1u);
  EXPECT_TRUE(r.per_class[2].empty());
  EXPECT_EQ(r.shortfall, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(r.size(), 3u);
  EXPECT_EQ(r.flattened().size(), 3u);
}

TEST(SelectPerClass, TiesGoToTheSmallerId) {
  FloatMatrix p(4, 2);
  p << 0.75f, 0.25f, 0.75f, 0.25f, 0.75f, 0.25f, 0.75f, 0.25f;
  const std::vector<SampleId> ids{SampleId{9}, SampleId{3}, SampleId{7}, SampleId{1}};
  const auto r = select_per_class(p, ids, 1.0, 2, ConfidenceMetric::MaxProb);
  ASSERT_EQ(r.per_class[0].size(), 2u);
  EXPECT_EQ(r.per_class[0][0].id, SampleId{1});
  EXPECT_EQ(r.per_class[0][1].id, SampleId{3});
}

TEST(SelectPerClass, InputValidation) {
  const FloatMatrix p = FloatMatrix::Constant(2, 2, 0.5f);
  const std::vector<SampleId> one{SampleId{1}};
  const std::vector<SampleId> dup{SampleId{1}, SampleId{1}};
  EXPECT_THROW(select_per_class(p, one, 1.0, 2, ConfidenceMetric::MaxProb), InputError);
  EXPECT_THROW(select_per_class(p, dup, 1.0, 2, ConfidenceMetric::MaxProb), InputError);
  const std::vector<SampleId> ok{SampleId{1}, SampleId{2}};
  EXPECT_THROW(select_per_class(p, ok, 0.1, 2, ConfidenceMetric::MaxProb), ConfigError);
}

}  // namespace
}  // namespace pseudorep
