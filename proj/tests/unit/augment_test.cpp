#include <gtest/gtest.h>

#include "pseudorep/augment.hpp"
#include "pseudorep/errors.hpp"
#include "pseudorep/generators.hpp"
#include "support.hpp"

namespace pseudorep {
namespace {

std::vector<float> ramp(std::size_t c, std::size_t h, std::size_t w) {
  std::vector<float> v(c * h * w);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i) / static_cast<float>(v.size());
  return v;
}

TEST(ApplyOp, FlipsAndRotationsMatchIndexOracle) {
  const Shape s{{2, 4, 4}};
  const auto x = ramp(2, 4, 4);
  const auto h = apply_op(AugmentOp::HFlip, s, x);
  const auto v = apply_op(AugmentOp::VFlip, s, x);
  const auto r90 = apply_op(AugmentOp::Rot90, s, x);
  const auto r180 = apply_op(AugmentOp::Rot180, s, x);
  const auto r270 = apply_op(AugmentOp::Rot270, s, x);
  auto at = [](const std::vector<float>& a, std::size_t c, std::size_t y, std::size_t xx) {
    return a[c * 16 + y * 4 + xx];
  };
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t xx = 0; xx < 4; ++xx) {
        EXPECT_EQ(at(h, c, y, xx), at(x, c, y, 3 - xx));
        EXPECT_EQ(at(v, c, y, xx), at(x, c, 3 - y, xx));
        EXPECT_EQ(at(r180, c, y, xx), at(x, c, 3 - y, 3 - xx));
        // Counter-clockwise: the top row comes from the right column.
        EXPECT_EQ(at(r90, c, y, xx), at(x, c, xx, 3 - y));
        EXPECT_EQ(at(r270, c, y, xx), at(x, c, 3 - xx, y));
      }
    }
  }
}

TEST(ApplyOp, GroupIdentities) {
  const Shape s{{1, 5, 5}};
  const auto x = ramp(1, 5, 5);
  auto twice = [&](AugmentOp op) { return apply_op(op, s, apply_op(op, s, x)); };
  EXPECT_EQ(twice(AugmentOp::HFlip), x);
  EXPECT_EQ(twice(AugmentOp::VFlip), x);
  EXPECT_EQ(twice(AugmentOp::Rot180), x);
  EXPECT_EQ(twice(AugmentOp::Rot90), apply_op(AugmentOp::Rot180, s, x));
  EXPECT_EQ(apply_op(AugmentOp::Rot270, s, apply_op(AugmentOp::Rot90, s, x)), x);
}

TEST(ApplyOp, ShapeRules) {
  const std::vector<float> sig{0.1f, 0.2f, 0.3f};
  EXPECT_EQ(apply_op(AugmentOp::HFlip, Shape{{3}}, sig), (std::vector<float>{0.3f, 0.2f, 0.1f}));
  EXPECT_THROW(apply_op(AugmentOp::Rot90, Shape{{3}}, sig), ConfigError);
  EXPECT_THROW(apply_op(AugmentOp::Rot90, Shape{{1, 2, 3}}, ramp(1, 2, 3)), ConfigError);
  EXPECT_NO_THROW(apply_op(AugmentOp::Rot180, Shape{{1, 2, 3}}, ramp(1, 2, 3)));
  EXPECT_THROW(apply_op(AugmentOp::HFlip, Shape{{4}}, sig), InputError);
}

TEST(Augment, AddsKCopiesWithParentsAndLabels) {
  const Dataset d = gen_crack_dataset(2, 8, 1);
  const Dataset a = augment(d, {.k = 3, .seed = 4});
  ASSERT_EQ(a.size(), d.size() * 4);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(a.id(i), d.id(i));
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t row = d.size() + i * 3 + c;
      EXPECT_EQ(a.id(row), augmented_id(d.id(i), c));
      EXPECT_EQ(a.parent(row), d.id(i));
      EXPECT_EQ(a.label(row), d.label(i));
      EXPECT_TRUE(a.id(row).value >> 63);
    }
  }
}

TEST(Augment, CopiesAreImagesOfTheOriginalUnderSomeOp) {
  const Dataset d = gen_crack_dataset(2, 8, 1);
  const AugmentationSpec spec{.k = 2, .seed = 9};
  const Dataset a = augment(d, spec);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      const auto copy = a.sample(d.size() + i * 2 + c);
      bool matched = false;
      for (auto op : spec.ops) {
        const auto want = apply_op(op, d.shape(), d.sample(i));
        matched |= std::equal(want.begin(), want.end(), copy.begin());
      }
      EXPECT_TRUE(matched);
    }
  }
}

TEST(Augment, KZeroWithoutOriginalIsEmptyAndOpsRequired) {
  const Dataset d = gen_crack_dataset(1, 8, 1);
  EXPECT_EQ(augment(d, {.k = 0}).size(), d.size());
  EXPECT_THROW(augment(d, {.ops = {}, .k = 1}), ConfigError);
  EXPECT_THROW(augment(gen_synthetic_signals(2, 2, 8, 0.5, 1), {.k = 1}), ConfigError);
  EXPECT_EQ(augment(gen_synthetic_signals(2, 2, 8, 0.5, 1), {.ops = {AugmentOp::HFlip}, .k = 1}).size(),
            8u);
  EXPECT_EQ(parse_augment_op(to_string(AugmentOp::Rot270)), AugmentOp::Rot270);
  EXPECT_THROW(parse_augment_op("shear"), ConfigError);
}

}  // namespace
}  // namespace pseudorep
