#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pseudorep/augment.hpp"
#include "pseudorep/dataset.hpp"
#include "pseudorep/manifest.hpp"
#include "pseudorep/mixup.hpp"
#include "pseudorep/models.hpp"
#include "pseudorep/pool.hpp"

namespace pseudorep {

struct EarlyStopConfig {
  bool enabled = true;
  std::size_t patience = 3;
};

struct LoopConfig {
  double alpha = 0.25;
  /// N of the selection rule; derived as |seed labels| / num_classes when unset.
  std::optional<std::size_t> n_per_class;
  /// Seed-pool augmentation (k copies per sample, originals kept).
  AugmentationSpec augmentation{.k = 3};
  /// Also augment promoted pseudo samples with the same spec.
  bool reaugment_pseudo = false;
  std::size_t max_iterations = 10;
  ConfidenceMetric metric = ConfidenceMetric::MaxProb;
  EarlyStopConfig early_stop;
  /// Share of seed labels held out for validation; 0 disables validation.
  double validation_fraction = 0.2;
  TrainingConfig m_l;
  TrainingConfig m_u;
  TrainingConfig m_w;
  /// Train a representation tower; false runs the zero-width ablation stub.
  bool use_representation = true;
  RepresentationKind representation = RepresentationKind::Autoencoder;
  std::size_t latent_dim = 32;
  std::string embedding_layer = "flatten";
  MixupSpec mixup;
  std::uint64_t seed = 0;

  /// Throws ConfigError; checks everything that does not need the data.
  void validate() const;
};

struct IterationMetrics {
  std::size_t iteration = 0;
  std::size_t labeled_size = 0;
  std::size_t labeled_roots = 0;
  std::size_t unlabeled_size = 0;
  std::size_t pseudo_total = 0;
  /// Samples promoted after this iteration's training.
  std::size_t added = 0;
  std::size_t cumulative_added = 0;
  std::size_t shortfall = 0;
  std::size_t embedding_width = 0;
  /// Fused (M_w) path.
  double test_accuracy = 0.0;
  double test_error = 1.0;
  /// M_l alone.
  double supervised_test_accuracy = 0.0;
  std::optional<double> validation_accuracy;
  /// Fused predictions on the unlabeled pool before selection, vs hidden truth.
  std::optional<double> unlabeled_accuracy;
  /// Correct fraction of this iteration's selection.
  std::optional<double> pseudo_precision;
  std::vector<std::optional<double>> per_class_precision;
  std::optional<double> mean_selected_confidence;
  /// Wrong fraction among the pseudo labels in the pool this iteration trained on.
  std::optional<double> pseudo_label_noise;
};

/// Everything the loop compares against but never trains on.
struct EvaluationData {
  const Dataset* validation = nullptr;
  const Dataset* test = nullptr;
  const HiddenTruth* truth = nullptr;
};

struct IterationModels {
  ClassifierModel m_l;
  ClassifierModel m_w;
};

struct IterationResult {
  PoolState state;
  IterationMetrics metrics;
  IterationModels models;
  SelectionRecord selection;
};

/// One pass of the loop body: train M_l on the labeled pool, fuse its
/// embedding with the frozen M_u embedding (nullptr: zero-width stub), train
/// M_w, score the unlabeled pool through the fused path and, when `select`
/// is set, promote the top q per predicted class.
IterationResult run_iteration(const PoolState& state, const LoopConfig& config,
                              const RepresentationModel* m_u, std::size_t n_per_class,
                              const EvaluationData& eval, bool select = true);

struct RunHistory {
  std::vector<IterationMetrics> records;
  std::size_t n_per_class = 0;
  std::size_t quota = 0;
  std::size_t best_iteration = 0;
  std::string stop_reason;

  const IterationMetrics& best() const { return records.at(best_iteration); }
  double baseline_accuracy() const { return records.at(0).supervised_test_accuracy; }
};

struct LoopInput {
  Dataset labeled;
  Dataset unlabeled;
  Dataset test;
  HiddenTruth truth;
};

struct RunResult {
  RunHistory history;
  std::optional<IterationModels> best_models;
  std::optional<RepresentationModel> m_u;
  PoolState final_state;
  std::vector<std::string> warnings;
};

/// Full loop: carve validation from the seed labels, augment the rest,
/// train M_u once on the unlabeled pool, then iterate until the pool is
/// exhausted, max_iterations selections were made, or validation accuracy
/// stalls for `patience` iterations. Pool invariants and M_u's parameters
/// are checked at every iteration.
RunResult run_loop(const LoopInput& input, const LoopConfig& config);

}  // namespace pseudorep
