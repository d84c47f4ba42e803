#include <gtest/gtest.h>

#include <random>

#include "pseudorep/errors.hpp"
#include "pseudorep/generators.hpp"
#include "pseudorep/models.hpp"
#include "support.hpp"

namespace pseudorep {
namespace {

/// Two Gaussian blobs in 4-D, well separated.
Dataset blobs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 0.3f);
  std::vector<float> x;
  std::vector<SampleId> ids;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    for (int j = 0; j < 4; ++j) x.push_back((c ? 1.0f : -1.0f) + g(rng));
    ids.push_back(SampleId{i});
    y.push_back(c);
  }
  return Dataset(Shape{{4}}, x, ids, y, 2);
}

TrainingConfig quick(std::size_t epochs = 10) {
  TrainingConfig c;
  c.epochs = epochs;
  c.batch_size = 16;
  c.seed = 3;
  return c;
}

TEST(Architectures, CnnTapsAndFlattenWidth) {
  const auto a = small_cnn_architecture(Shape{{1, 16, 20}}, 5, 0.2);
  EXPECT_EQ(a.tap_names(), (std::vector<std::string>{"input", "conv1", "conv2", "conv3", "flatten"}));
  EXPECT_EQ(a.width_at(*a.tap_index("flatten")), 32u * 2 * 2);
  EXPECT_EQ(a.output_size(), 5u);
  EXPECT_THROW(small_cnn_architecture(Shape{{1, 4, 4}}, 3, 0.2), ConfigError);
  EXPECT_THROW(small_cnn_architecture(Shape{{8}}, 3, 0.2), ConfigError);
  const auto m = mlp_architecture(10, 3, 0.1);
  EXPECT_TRUE(m.tap_index("fc2"));
  EXPECT_EQ(m.width_at(*m.tap_index("flatten")), 64u);
  EXPECT_THROW(head_architecture(0, 3, 0.1), DegenerateError);
}

TEST(Classifier, LearnsSeparableData) {
  const Dataset d = blobs(200, 1);
  const ClassifierModel m = train_classifier(d, quick(15));
  EXPECT_GE(accuracy(m, d), 0.98);
  ASSERT_EQ(m.loss_history.size(), 15u);
  EXPECT_LT(m.loss_history.back(), m.loss_history.front());
}

TEST(Classifier, DeterministicForAFixedSeed) {
  const Dataset d = blobs(64, 2);
  const auto a = predict_proba(train_classifier(d, quick(3)), d);
  const auto b = predict_proba(train_classifier(d, quick(3)), d);
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0f);
  TrainingConfig other = quick(3);
  other.seed = 4;
  EXPECT_GT((a - predict_proba(train_classifier(d, other), d)).cwiseAbs().maxCoeff(), 0.0f);
}

TEST(Classifier, ProbabilitiesAreNormalized) {
  const Dataset d = gen_synthetic_classes(4, 8, 16, 0.5, 1);
  const ClassifierModel m = make_classifier(d.shape(), 4, quick());
  const FloatMatrix p = predict_proba(m, d);
  ASSERT_EQ(p.rows(), 32);
  for (Eigen::Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).cast<double>().sum(), 1.0, 1e-6);
  const ClassifierModel z = make_classifier(d.shape(), 4, quick(), true);
  const FloatMatrix pz = predict_proba(z, d);
  EXPECT_NEAR(pz(0, 0), 0.25f, 1e-6);
}

TEST(Classifier, DegenerateAndMismatchedInputs) {
  std::vector<int> same(10, 1);
  const Dataset d = blobs(10, 3);
  EXPECT_THROW(train_classifier(d.with_labels(same), quick()), DegenerateError);
  EXPECT_THROW(train_classifier(d.without_labels(), quick()), InputError);
  const ClassifierModel m = make_classifier(d.shape(), 2, quick());
  EXPECT_THROW(predict_proba(m, FloatMatrix::Zero(2, 5)), InputError);
  EXPECT_THROW(embed(m, d, "nope"), ConfigError);
}

TEST(Helpers, OneHotArgmaxAccuracy) {
  const std::vector<int> y{2, 0, 1};
  const FloatMatrix h = one_hot(y, 3);
  EXPECT_EQ(h(0, 2), 1.0f);
  EXPECT_EQ(h.sum(), 3.0f);
  EXPECT_EQ(argmax_rows(h), y);
  FloatMatrix p(2, 3);
  p << 0.2f, 0.5f, 0.3f, 0.4f, 0.4f, 0.2f;
  EXPECT_EQ(argmax_rows(p), (std::vector<int>{1, 0}));
  const std::vector<int> truth{1, 1};
  EXPECT_DOUBLE_EQ(accuracy(p, truth), 0.5);
}

TEST(Embedding, TapWidthsAndFusion) {
  const Dataset d = gen_synthetic_classes(3, 6, 16, 0.5, 1);
  const ClassifierModel m = make_classifier(d.shape(), 3, quick());
  const Embedding e = embed(m, d, "flatten");
  EXPECT_EQ(e.rows(), d.size());
  EXPECT_EQ(e.width(), 32u * 2 * 2);
  EXPECT_EQ(e.ids, d.ids());
  EXPECT_EQ(embed(m, d, "conv1").width(), 8u * 16 * 16);
  const Embedding stub = empty_embedding(d);
  EXPECT_EQ(stub.width(), 0u);
  const Embedding w = concat_embeddings(e, stub);
  EXPECT_EQ(w.width(), e.width());
  EXPECT_EQ((w.values - e.values).cwiseAbs().maxCoeff(), 0.0f);
  Embedding shuffled = stub;
  std::swap(shuffled.ids[0], shuffled.ids[1]);
  EXPECT_THROW(concat_embeddings(e, shuffled), ConsistencyError);
}

TEST(Head, TrainsOnEmbeddingsAndLeavesUpstreamUntouched) {
  const Dataset d = blobs(200, 5);
  const ClassifierModel upstream = make_classifier(d.shape(), 2, quick());
  const auto before = upstream.network.parameters()[0].value;
  const Embedding e = embed(upstream, d, "input");
  const ClassifierModel head = train_head(e, d.labels(), 2, quick(20));
  EXPECT_EQ((upstream.network.parameters()[0].value - before).cwiseAbs().maxCoeff(), 0.0f);
  ASSERT_TRUE(head.standardizer);
  EXPECT_GE(accuracy(predict_proba(head, e), d.labels()), 0.95);
  EXPECT_THROW(train_head(empty_embedding(d), d.labels(), 2, quick()), DegenerateError);
}

TEST(TrainingConfig, JsonRoundTripAndValidation) {
  TrainingConfig c;
  c.learning_rate = 0.01;
  c.epochs = 7;
  const TrainingConfig back = training_config_from_json(to_json(c));
  EXPECT_EQ(back.learning_rate, 0.01);
  EXPECT_EQ(back.epochs, 7u);
  EXPECT_EQ(training_config_from_json(Json{{"preset", "high_lr"}}).learning_rate, 0.1);
  EXPECT_THROW(training_config_from_json(Json{{"lr", 0.1}}), ConfigError);
  EXPECT_THROW(training_config_from_json(Json{{"optimizer", "sgd"}}), ConfigError);
  TrainingConfig bad;
  bad.dropout = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(GradientCheck, ClassifierMatchesFiniteDifferences) {
  const Dataset d = gen_synthetic_classes(3, 2, 8, 0.5, 1);
  const ClassifierModel m = make_classifier(d.shape(), 3, quick());
  const std::vector<std::size_t> rows{0, 2, 4, 5};
  const Dataset batch = d.subset(rows);
  FloatMatrix x = as_matrix(batch);
  Rng rng(9);
  std::uniform_real_distribution<float> jitter(0.05f, 0.25f);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += jitter(rng);
  const auto r = gradient_check(m, x, batch.labels(), {.max_parameters = 300});
  EXPECT_EQ(r.checked, 300u);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter;
  EXPECT_THROW(gradient_check(m, FloatMatrix::Zero(9, 64), std::vector<int>(9, 0)), InputError);
}

}  // namespace
}  // namespace pseudorep
