#include "pseudorep/loop.hpp"

#include <cmath>

#include "pseudorep/errors.hpp"
#include "pseudorep/split.hpp"

namespace pseudorep {

void LoopConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
  if (n_per_class && *n_per_class == 0) throw ConfigError("n_per_class must be positive");
  if (n_per_class) selection_quota(alpha, *n_per_class);
  if (augmentation.k > 0 && augmentation.ops.empty()) {
    throw ConfigError("augmentation ops must be non-empty when k > 0");
  }
  if (early_stop.enabled && early_stop.patience == 0) {
    throw ConfigError("early_stop.patience must be positive");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }
  if (early_stop.enabled && validation_fraction == 0.0) {
    throw ConfigError("early stopping needs a validation_fraction > 0");
  }
  m_l.validate();
  m_u.validate();
  m_w.validate();
  mixup.validate();
  if (latent_dim == 0) throw ConfigError("latent_dim must be positive");
  if (mixup.mode == MixupMode::VaeLatent && !use_representation) {
    throw ConfigError("vae_latent mixup needs the representation tower");
  }
  if (mixup.mode == MixupMode::VaeLatent && representation != RepresentationKind::Vae &&
      !mixup.allow_autoencoder_latent) {
    throw ConfigError("vae_latent mixup needs representation = vae");
  }
}

namespace {

TrainingConfig reseeded(TrainingConfig c, std::uint64_t seed, std::string_view tag,
                        std::size_t iteration) {
  c.seed = derive_seed(derive_seed(seed, tag), static_cast<std::uint64_t>(iteration));
  return c;
}

std::optional<double> truth_accuracy(const std::vector<int>& pred, const Dataset& data,
                                     const HiddenTruth* truth) {
  if (truth == nullptr || data.empty()) return std::nullopt;
  std::size_t hit = 0, known = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto y = truth->lookup(data.id(i));
    if (!y) continue;
    ++known;
    hit += *y == pred[i];
  }
  if (known == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(known);
}

std::optional<double> pool_noise(const PoolState& state, const HiddenTruth* truth) {
  if (truth == nullptr) return std::nullopt;
  std::size_t wrong = 0, total = 0;
  for (std::size_t i = 0; i < state.labeled.size(); ++i) {
    const auto& p = state.provenance[i];
    if (p.origin != Origin::Pseudo) continue;
    const auto y = truth->lookup(p.root);
    if (!y) continue;
    ++total;
    wrong += *y != state.labeled.label(i);
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(wrong) / static_cast<double>(total);
}

}  // namespace

IterationResult run_iteration(const PoolState& state, const LoopConfig& config,
                              const RepresentationModel* m_u, std::size_t n_per_class,
                              const EvaluationData& eval, bool select) {
  check_pool_invariants(state);
  const std::size_t t = state.iteration;
  const int k = state.labeled.num_classes();

  ClassifierTrainOptions options;
  options.mixup = config.mixup;
  options.mixup.seed = derive_seed(derive_seed(config.mixup.seed ^ config.seed, "mixup"), t);
  options.latent_model = m_u;
  if (config.mixup.mode == MixupMode::VaeLatent && m_u == nullptr) {
    throw ConfigError("vae_latent mixup needs a representation model");
  }

  IterationResult out;
  out.models.m_l = train_classifier(state.labeled, reseeded(config.m_l, config.seed, "m_l", t), options);
  out.models.m_l.model_id = "M_l@" + std::to_string(t);
  const ClassifierModel& m_l = out.models.m_l;

  auto fused = [&](const Dataset& d) {
    return concat_embeddings(embed(m_l, d, config.embedding_layer),
                             m_u ? embed(*m_u, d) : empty_embedding(d));
  };
  const Embedding w = fused(state.labeled);
  out.models.m_w = train_head(w, state.labeled.labels(), k, reseeded(config.m_w, config.seed, "m_w", t));
  out.models.m_w.model_id = "M_w@" + std::to_string(t);
  const ClassifierModel& m_w = out.models.m_w;

  IterationMetrics& m = out.metrics;
  m.iteration = t;
  m.labeled_size = state.labeled.size();
  m.unlabeled_size = state.unlabeled.size();
  m.labeled_roots = state.root_count() - state.unlabeled.size();
  m.pseudo_total = state.pseudo_count();
  m.embedding_width = w.width();
  m.pseudo_label_noise = pool_noise(state, eval.truth);
  if (eval.test && !eval.test->empty()) {
    m.test_accuracy = accuracy(predict_proba(m_w, fused(*eval.test)), eval.test->labels());
    m.test_error = 1.0 - m.test_accuracy;
    m.supervised_test_accuracy = accuracy(m_l, *eval.test);
  }
  if (eval.validation && !eval.validation->empty()) {
    m.validation_accuracy =
        accuracy(predict_proba(m_w, fused(*eval.validation)), eval.validation->labels());
  }

  out.selection.iteration = t;
  out.selection.per_class.resize(static_cast<std::size_t>(k));
  out.selection.shortfall.assign(static_cast<std::size_t>(k), 0);
  if (!state.unlabeled.empty()) {
    const FloatMatrix proba = predict_proba(m_w, fused(state.unlabeled));
    m.unlabeled_accuracy = truth_accuracy(argmax_rows(proba), state.unlabeled, eval.truth);
    if (select) {
      out.selection = select_per_class(proba, state.unlabeled.ids(), config.alpha, n_per_class,
                                       config.metric);
      out.selection.iteration = t;
    }
  }

  const auto& sel = out.selection;
  m.added = sel.size();
  for (auto s : sel.shortfall) m.shortfall += s;
  m.per_class_precision.assign(sel.per_class.size(), std::nullopt);
  if (m.added > 0) {
    double conf = 0.0;
    std::size_t hit = 0, known = 0;
    for (std::size_t c = 0; c < sel.per_class.size(); ++c) {
      std::size_t c_hit = 0, c_known = 0;
      for (const auto& s : sel.per_class[c]) {
        conf += s.confidence;
        const auto y = eval.truth ? eval.truth->lookup(s.id) : std::nullopt;
        if (!y) continue;
        ++c_known;
        c_hit += *y == s.label;
      }
      if (c_known > 0) {
        m.per_class_precision[c] = static_cast<double>(c_hit) / static_cast<double>(c_known);
      }
      hit += c_hit;
      known += c_known;
    }
    m.mean_selected_confidence = conf / static_cast<double>(m.added);
    if (known > 0) m.pseudo_precision = static_cast<double>(hit) / static_cast<double>(known);
  }

  out.state = apply_selection(state, sel, config.reaugment_pseudo ? &config.augmentation : nullptr);
  out.state.iteration = t + 1;
  return out;
}

namespace {

std::vector<FloatMatrix> snapshot(const RepresentationModel& m) {
  std::vector<FloatMatrix> out;
  for (const auto& p : m.encoder.parameters()) out.push_back(p.value);
  for (const auto& p : m.decoder.parameters()) out.push_back(p.value);
  return out;
}

/// Drops augmentation ops that 1-D samples do not support.
LoopConfig adapt_to_shape(LoopConfig config, const Shape& shape, std::vector<std::string>& warnings) {
  if (shape.is_image()) return config;
  auto& ops = config.augmentation.ops;
  const auto before = ops.size();
  std::erase_if(ops, [](AugmentOp op) { return op != AugmentOp::HFlip; });
  if (ops.size() != before) {
    if (ops.empty()) ops.push_back(AugmentOp::HFlip);
    warnings.push_back("1-D samples: augmentation restricted to hflip (time reversal)");
  }
  return config;
}

}  // namespace

RunResult run_loop(const LoopInput& input, const LoopConfig& requested) {
  requested.validate();
  std::vector<std::string> shape_warnings;
  const LoopConfig config = adapt_to_shape(requested, input.labeled.shape(), shape_warnings);
  if (input.labeled.empty() || !input.labeled.has_labels()) {
    throw ConfigError("run_loop needs a non-empty labeled seed pool");
  }
  if (input.unlabeled.has_labels()) throw ConfigError("run_loop: unlabeled pool carries labels");
  const int k = input.labeled.num_classes();
  const std::size_t n_per_class =
      config.n_per_class.value_or(input.labeled.size() / static_cast<std::size_t>(k));
  if (n_per_class == 0) throw ConfigError("derived n_per_class is 0");

  RunResult result;
  result.history.n_per_class = n_per_class;
  result.history.quota = selection_quota(config.alpha, n_per_class);

  Dataset seed_train = input.labeled;
  Dataset validation;
  if (config.validation_fraction > 0.0) {
    auto [kept, held] =
        holdout(input.labeled, config.validation_fraction, derive_seed(config.seed, "validation"));
    seed_train = std::move(kept);
    validation = std::move(held);
  }
  Dataset train = seed_train;
  if (config.augmentation.k > 0) {
    AugmentationSpec spec = config.augmentation;
    spec.seed = derive_seed(config.seed ^ config.augmentation.seed, "augment");
    train = augment(seed_train, spec);
  }
  PoolState state = make_pool_state(std::move(train), input.unlabeled);

  if (config.use_representation) {
    if (input.unlabeled.empty()) throw ConfigError("the representation tower needs unlabeled data");
    TrainingConfig cu = config.m_u;
    cu.seed = derive_seed(config.seed, "m_u");
    result.m_u = config.representation == RepresentationKind::Vae
                     ? train_vae(input.unlabeled, config.latent_dim, cu)
                     : train_autoencoder(input.unlabeled, config.latent_dim, cu);
    result.m_u->model_id = "M_u";
    result.warnings = result.m_u->warnings;
  }
  result.warnings.insert(result.warnings.begin(), shape_warnings.begin(), shape_warnings.end());
  const RepresentationModel* m_u = result.m_u ? &*result.m_u : nullptr;
  const auto frozen = m_u ? snapshot(*m_u) : std::vector<FloatMatrix>{};

  EvaluationData eval{validation.empty() ? nullptr : &validation, &input.test, &input.truth};
  const std::size_t roots = state.root_count();
  std::optional<double> best_val;
  std::size_t stall = 0, cumulative = 0;

  for (std::size_t t = 0;; ++t) {
    const bool select = t < config.max_iterations && !state.unlabeled.empty();
    IterationResult it = run_iteration(state, config, m_u, n_per_class, eval, select);

    check_pool_invariants(it.state);
    if (it.state.root_count() != roots) throw ConsistencyError("loop: root sample count changed");
    if (it.state.labeled.size() < state.labeled.size() ||
        state.unlabeled.size() - it.state.unlabeled.size() != it.metrics.added) {
      throw ConsistencyError("loop: pool sizes are not monotone");
    }
    if (m_u && snapshot(*m_u) != frozen) throw ConsistencyError("loop: M_u parameters changed");

    cumulative += it.metrics.added;
    it.metrics.cumulative_added = cumulative;
    result.history.records.push_back(it.metrics);

    const auto& val = it.metrics.validation_accuracy;
    if (!val) {
      result.history.best_iteration = t;
      result.best_models = std::move(it.models);
    } else if (!best_val || *val > *best_val) {
      best_val = val;
      stall = 0;
      result.history.best_iteration = t;
      result.best_models = std::move(it.models);
    } else {
      ++stall;
    }
    state = std::move(it.state);

    if (!select) {
      result.history.stop_reason = t >= config.max_iterations ? "max_iterations" : "unlabeled_exhausted";
      break;
    }
    if (config.early_stop.enabled && val && stall >= config.early_stop.patience) {
      result.history.stop_reason = "early_stop";
      break;
    }
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace pseudorep
