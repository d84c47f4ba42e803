#include <gtest/gtest.h>

#include "pseudorep/errors.hpp"
#include "pseudorep/generators.hpp"
#include "pseudorep/mixup.hpp"
#include "pseudorep/models.hpp"
#include "support.hpp"

namespace pseudorep {
namespace {

std::vector<float> uniform_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

TEST(MixupPair, ConvexityLabelAlgebraAndEndpoints) {
  std::mt19937_64 rng(1);
  Rng lam_rng(2);
  const MixupSpec spec{MixupMode::Input, "", 0.4};
  for (int trial = 0; trial < 500; ++trial) {
    const auto x1 = uniform_vec(12, rng), x2 = uniform_vec(12, rng);
    std::vector<float> y1(4, 0.0f), y2(4, 0.0f);
    y1[trial % 4] = 1.0f;
    y2[(trial / 4) % 4] = 1.0f;
    const double lam = sample_lambda(spec, lam_rng);
    ASSERT_GE(lam, 0.0);
    ASSERT_LE(lam, 1.0);
    const auto m = mixup_pair(x1, y1, x2, y2, lam);
    float ysum = 0.0f;
    for (std::size_t i = 0; i < 12; ++i) {
      EXPECT_GE(m.x[i], std::min(x1[i], x2[i]) - 1e-6f);
      EXPECT_LE(m.x[i], std::max(x1[i], x2[i]) + 1e-6f);
      EXPECT_NEAR(m.x[i], lam * x1[i] + (1 - lam) * x2[i], 1e-6);
    }
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_NEAR(m.y[c], lam * y1[c] + (1 - lam) * y2[c], 1e-6);
      ysum += m.y[c];
    }
    EXPECT_NEAR(ysum, 1.0f, 1e-6f);
    const auto at1 = mixup_pair(x1, y1, x2, y2, 1.0);
    const auto at0 = mixup_pair(x1, y1, x2, y2, 0.0);
    EXPECT_EQ(at1.x, x1);
    EXPECT_EQ(at0.x, x2);
    EXPECT_EQ(at1.y, y1);
  }
}

TEST(MixupPair, ShapeAndRangeErrors) {
  const std::vector<float> a(3), b(4), y(2);
  EXPECT_THROW(mixup_pair(a, y, b, y, 0.5), InputError);
  EXPECT_THROW(mixup_pair(a, y, a, b, 0.5), InputError);
  EXPECT_THROW(mixup_pair(a, y, a, y, 1.5), InputError);
}

TEST(SampleLambda, BetaMoments) {
  for (double a : {0.2, 1.0, 2.0}) {
    Rng rng(7);
    const MixupSpec spec{MixupMode::Input, "", a};
    const int n = 40000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double l = sample_lambda(spec, rng);
      s += l;
      ss += l * l;
    }
    const double mean = s / n, var = ss / n - mean * mean;
    EXPECT_NEAR(mean, 0.5, 0.01);
    EXPECT_NEAR(var, 1.0 / (4.0 * (2.0 * a + 1.0)), 0.01);
  }
}

TEST(MixPlan, PartnersFormAPermutation) {
  Rng rng(3);
  const MixPlan plan = draw_mix_plan(17, {MixupMode::Input, "", 1.0}, rng);
  std::vector<std::size_t> sorted = plan.partner;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 17; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_EQ(plan.lambda.size(), 17u);
  EXPECT_THROW(draw_mix_plan(1, {MixupMode::Input, "", 1.0}, rng), DegenerateError);
}

TEST(MixPlan, ApplyMixesRowsAndLabelsWithTheSameLambda) {
  Rng rng(4);
  const MixPlan plan = draw_mix_plan(6, {MixupMode::Input, "", 1.0}, rng);
  const FloatMatrix x = FloatMatrix::Random(6, 5);
  const std::vector<int> y{0, 1, 2, 0, 1, 2};
  const FloatMatrix t = one_hot(y, 3);
  const auto [mx, my] = apply_mix_plan(x, t, plan);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const auto p = static_cast<Eigen::Index>(plan.partner[static_cast<std::size_t>(i)]);
    const float lam = plan.lambda[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < 5; ++j) EXPECT_EQ(mx(i, j), mix_value(lam, x(i, j), x(p, j)));
    for (Eigen::Index c = 0; c < 3; ++c) EXPECT_EQ(my(i, c), mix_value(lam, t(i, c), t(p, c)));
  }
}

TEST(FeatureMixup, InputLayerEqualsInputMixupBitwise) {
  const Dataset d = gen_synthetic_classes(3, 4, 16, 0.5, 1);
  TrainingConfig c;
  const ClassifierModel m = make_classifier(d.shape(), 3, c);
  const FloatMatrix x = as_matrix(d);
  const FloatMatrix t = one_hot(d.labels(), 3);
  const MixupSpec spec{MixupMode::Feature, "input", 1.0, 9};
  Rng r1(11), r2(11);
  const FeatureMixBatch f = feature_mixup_batch(m, "input", x, t, spec, r1);
  const MixPlan plan = draw_mix_plan(static_cast<std::size_t>(x.rows()), spec, r2);
  const auto [mx, my] = apply_mix_plan(x, t, plan);
  EXPECT_EQ(f.tap_index, 0u);
  EXPECT_TRUE(f.activations == mx);
  EXPECT_TRUE(f.labels == my);
}

TEST(FeatureMixup, HiddenLayerMixesActivationsAtTheTap) {
  const Dataset d = gen_synthetic_classes(3, 4, 16, 0.5, 2);
  TrainingConfig c;
  const ClassifierModel m = make_classifier(d.shape(), 3, c);
  const FloatMatrix x = as_matrix(d);
  const FloatMatrix t = one_hot(d.labels(), 3);
  const MixupSpec spec = MixupSpec::feature("conv2");
  Rng r1(5), r2(5);
  const FeatureMixBatch f = feature_mixup_batch(m, "conv2", x, t, spec, r1);
  const std::size_t tap = *m.network.architecture().tap_index("conv2");
  const FloatMatrix h = m.network.infer(x, 0, tap);
  const MixPlan plan = draw_mix_plan(static_cast<std::size_t>(x.rows()), spec, r2);
  const auto [mh, my] = apply_mix_plan(h, t, plan);
  EXPECT_EQ(f.tap_index, tap);
  EXPECT_TRUE(f.activations == mh);
  EXPECT_THROW(feature_mixup_batch(m, "conv9", x, t, spec, r1), ConfigError);
}

TEST(MixupSpec, Validation) {
  EXPECT_THROW((MixupSpec{MixupMode::Input, "", 0.0}).validate(), ConfigError);
  EXPECT_THROW((MixupSpec{MixupMode::Feature, "", 1.0}).validate(), ConfigError);
  EXPECT_THROW((MixupSpec{MixupMode::Input, "conv1", 1.0}).validate(), ConfigError);
  EXPECT_NO_THROW(MixupSpec::feature().validate());
  EXPECT_EQ(parse_mixup_mode(to_string(MixupMode::VaeLatent)), MixupMode::VaeLatent);
  EXPECT_THROW(parse_mixup_mode("cutmix"), ConfigError);
}

TEST(VaeLatentMixup, EndpointsReconstructAndOutputIsAnImage) {
  const Dataset d = gen_synthetic_classes(2, 6, 16, 0.5, 3);
  TrainingConfig c;
  c.epochs = 2;
  const RepresentationModel vae = train_vae(d, 8, c);
  const FloatMatrix rec = reconstruct(vae, as_matrix(d));
  const auto out1 = vae_latent_mixup(vae, d.sample(0), d.sample(1), 1.0);
  for (std::size_t j = 0; j < out1.size(); ++j) EXPECT_NEAR(out1[j], rec(0, static_cast<Eigen::Index>(j)), 1e-6);
  const auto mid = vae_latent_mixup(vae, d.sample(0), d.sample(1), 0.5);
  for (float v : mid) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  const RepresentationModel ae = train_autoencoder(d, 8, c);
  EXPECT_THROW(vae_latent_mixup(ae, d.sample(0), d.sample(1), 0.5), ConfigError);
  EXPECT_NO_THROW(vae_latent_mixup(ae, d.sample(0), d.sample(1), 0.5, true));
}

TEST(MixupTraining, AllModesTrainDeterministically) {
  const Dataset d = gen_synthetic_classes(3, 10, 16, 0.5, 4);
  TrainingConfig c;
  c.epochs = 2;
  c.batch_size = 8;
  const RepresentationModel vae = train_vae(d, 8, c);
  for (const MixupSpec& spec : {MixupSpec{MixupMode::Input}, MixupSpec::feature("conv1"),
                                MixupSpec::feature("flatten"), MixupSpec{MixupMode::VaeLatent}}) {
    ClassifierTrainOptions opts;
    opts.mixup = spec;
    opts.latent_model = &vae;
    const auto a = predict_proba(train_classifier(d, c, opts), d);
    const auto b = predict_proba(train_classifier(d, c, opts), d);
    EXPECT_TRUE(a == b) << to_string(spec.mode) << " " << spec.layer;
  }
  ClassifierTrainOptions missing;
  missing.mixup = MixupSpec{MixupMode::VaeLatent};
  EXPECT_THROW(train_classifier(d, c, missing), ConfigError);
}

}  // namespace
}  // namespace pseudorep
