#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "pseudorep/errors.hpp"
#include "pseudorep/history.hpp"
#include "support.hpp"

namespace pseudorep {
namespace {

std::string error_of(const Json& j) {
  try {
    loop_config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(LoopConfigJson, RoundTripExpandsEveryField) {
  LoopConfig c;
  c.alpha = 0.5;
  c.n_per_class = 12;
  c.metric = ConfidenceMetric::NegEntropy;
  c.representation = RepresentationKind::Vae;
  c.mixup = MixupSpec::feature("conv1");
  c.m_w.epochs = 7;
  c.augmentation.ops = {AugmentOp::HFlip};
  const Json j = to_json(c);
  for (const char* key : {"alpha", "n_per_class", "augmentation", "max_iterations", "confidence",
                          "early_stop", "validation_fraction", "m_l", "m_u", "m_w", "mixup", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  const LoopConfig back = loop_config_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(LoopConfigJson, ErrorsNameTheFieldPath) {
  EXPECT_EQ(error_of(Json{{"max_iterations", 3}}), "alpha: missing required field");
  EXPECT_NE(error_of(Json{{"alpha", 0.2}, {"bogus", 1}}).find("bogus"), std::string::npos);
  EXPECT_EQ(error_of(Json{{"alpha", 0.2}, {"m_l", {{"epochs", 0}}}}).rfind("m_l.", 0), 0u);
  EXPECT_NE(error_of(Json{{"alpha", 0.2}, {"mixup", {{"mode", "cutmix"}}}}).find("mixup"),
            std::string::npos);
  EXPECT_NE(error_of(Json{{"alpha", "high"}}), "");
  EXPECT_EQ(error_of(Json{{"alpha", 0.2}}), "");
}

IterationMetrics sample_metrics(std::size_t t) {
  IterationMetrics m;
  m.iteration = t;
  m.labeled_size = 100 + t;
  m.added = 7;
  m.test_accuracy = 0.8 + 0.01 * static_cast<double>(t);
  m.test_error = 1.0 - m.test_accuracy;
  m.validation_accuracy = 0.75;
  m.per_class_precision = {1.0, std::nullopt};
  m.pseudo_precision = 0.5;
  return m;
}

TEST(HistoryJsonl, RoundTripAndDistance) {
  testing::TempDir dir("hist");
  RunHistory h;
  for (std::size_t t = 0; t < 3; ++t) h.records.push_back(sample_metrics(t));
  write_history_jsonl(dir / "h.jsonl", h);
  const auto back = read_history_jsonl(dir / "h.jsonl");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[1].labeled_size, 101u);
  EXPECT_FALSE(back[2].per_class_precision[1]);
  EXPECT_FALSE(back[0].unlabeled_accuracy);
  EXPECT_EQ(history_distance(h.records, back), 0.0);
  auto moved = back;
  moved[2].test_accuracy += 0.25;
  EXPECT_NEAR(history_distance(h.records, moved), 0.25, 1e-12);
  moved.pop_back();
  EXPECT_TRUE(std::isinf(history_distance(h.records, moved)));
  std::ofstream(dir / "bad.jsonl") << "{not json\n";
  EXPECT_THROW(read_history_jsonl(dir / "bad.jsonl"), FormatError);
}

TEST(HistorySummary, ReportsBestAndStop) {
  RunHistory h;
  for (std::size_t t = 0; t < 3; ++t) h.records.push_back(sample_metrics(t));
  h.best_iteration = 1;
  h.stop_reason = "max_iterations";
  const Json s = history_summary(h);
  EXPECT_EQ(s.at("iterations"), 3);
  EXPECT_EQ(s.at("best_iteration"), 1);
  EXPECT_EQ(s.at("stop_reason"), "max_iterations");
}

}  // namespace
}  // namespace pseudorep
