#include <gtest/gtest.h>

#include "pseudorep/errors.hpp"
#include "pseudorep/generators.hpp"

namespace pseudorep {
namespace {

double half_mean(const Dataset& d, std::size_t i, bool left) {
  const std::size_t n = d.shape().width();
  double s = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = left ? 0 : n / 2; x < (left ? n / 2 : n); ++x) s += d.sample(i)[y * n + x];
  }
  return s / static_cast<double>(n * n / 2);
}

TEST(Generators, ShapesCountsAndDeterminism) {
  const Dataset crack = gen_crack_dataset(100, 32, 7);
  EXPECT_EQ(crack.size(), 300u);
  EXPECT_EQ(crack.shape(), (Shape{{1, 32, 32}}));
  EXPECT_EQ(crack.class_counts(), std::vector<std::size_t>(3, 100));
  EXPECT_EQ(crack.content_hash(), gen_crack_dataset(100, 32, 7).content_hash());
  EXPECT_NE(crack.content_hash(), gen_crack_dataset(100, 32, 8).content_hash());

  const Dataset wafer = gen_synthetic_classes(7, 10, 16, 0.5, 1);
  EXPECT_EQ(wafer.size(), 70u);
  EXPECT_EQ(wafer.num_classes(), 7);
  EXPECT_EQ(wafer.class_counts(), std::vector<std::size_t>(7, 10));

  const Dataset ecg = gen_synthetic_signals(5, 6, 64, 0.5, 1);
  EXPECT_EQ(ecg.shape(), (Shape{{64}}));
  for (float v : ecg.samples()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Generators, CrackClassesPutCracksInTheRightHalves) {
  const Dataset d = gen_crack_dataset(30, 32, 3);
  double left[3] = {}, right[3] = {};
  for (std::size_t i = 0; i < d.size(); ++i) {
    left[d.label(i)] += half_mean(d, i, true);
    right[d.label(i)] += half_mean(d, i, false);
  }
  EXPECT_GT(left[0], right[0]);
  EXPECT_GT(right[1], left[1]);
  EXPECT_GT(left[2], right[1] * 0.5);
  EXPECT_GT(right[2], left[0] * 0.5);
}

TEST(Generators, ParameterValidation) {
  EXPECT_THROW(gen_crack_dataset(10, 4, 0), ConfigError);
  EXPECT_THROW(gen_synthetic_classes(8, 10, 16, 0.5, 0), ConfigError);
  EXPECT_THROW(gen_synthetic_classes(3, 10, 16, 0.0, 0), ConfigError);
  EXPECT_THROW(gen_synthetic_signals(6, 10, 16, 0.5, 0), ConfigError);
  EXPECT_THROW(gen_synthetic_signals(3, 0, 16, 0.5, 0), ConfigError);
}

}  // namespace
}  // namespace pseudorep
