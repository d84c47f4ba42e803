#include <algorithm>
#include <cmath>
#include <set>

#include "model_losses.hpp"
#include "pseudorep/errors.hpp"
#include "pseudorep/models.hpp"
#include "training_internal.hpp"

namespace pseudorep {

namespace {

nn::LayerSpec conv(std::string name, std::size_t c, std::size_t h, std::size_t w,
                   std::size_t filters) {
  nn::LayerSpec s;
  s.kind = nn::LayerKind::Conv2d;
  s.name = std::move(name);
  s.channels = c;
  s.height = h;
  s.width = w;
  s.filters = filters;
  return s;
}

nn::LayerSpec pool(std::string name, std::size_t c, std::size_t h, std::size_t w) {
  nn::LayerSpec s;
  s.kind = nn::LayerKind::MaxPool2;
  s.name = std::move(name);
  s.channels = c;
  s.height = h;
  s.width = w;
  return s;
}

nn::LayerSpec dense(std::string name, std::size_t in, std::size_t out) {
  nn::LayerSpec s;
  s.kind = nn::LayerKind::Dense;
  s.name = std::move(name);
  s.in_features = in;
  s.out_features = out;
  return s;
}

nn::LayerSpec relu(std::string name, std::size_t width) {
  nn::LayerSpec s;
  s.kind = nn::LayerKind::ReLU;
  s.name = std::move(name);
  s.in_features = width;
  return s;
}

nn::LayerSpec dropout(std::string name, std::size_t width, double rate) {
  nn::LayerSpec s;
  s.kind = nn::LayerKind::Dropout;
  s.name = std::move(name);
  s.in_features = width;
  s.rate = rate;
  return s;
}

std::string seed_suffix(std::uint64_t seed) {
  static const char* hex = "0123456789abcdef";
  std::string s(8, '0');
  const auto v = static_cast<std::uint32_t>(splitmix64(seed));
  for (int i = 0; i < 8; ++i) s[static_cast<std::size_t>(7 - i)] = hex[(v >> (4 * i)) & 0xF];
  return s;
}

void require_two_classes(std::span<const int> labels) {
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw DegenerateError("training needs at least two distinct labels (got " +
                          std::to_string(distinct.size()) + ")");
  }
}

}  // namespace

nn::Architecture small_cnn_architecture(const Shape& input, int num_classes, double rate) {
  if (!input.is_image()) throw ConfigError("small CNN needs image input, got " + input.to_string());
  const std::size_t c = input.channels(), h = input.height(), w = input.width();
  if (h < 8 || w < 8) throw ConfigError("small CNN needs images of at least 8x8");
  const std::size_t h1 = h / 2, w1 = w / 2, h2 = h1 / 2, w2 = w1 / 2, h3 = h2 / 2, w3 = w2 / 2;
  nn::Architecture a;
  a.id = "small_cnn";
  a.input_size = c * h * w;
  a.layers = {
      conv("conv1", c, h, w, 8),
      relu("relu1", 8 * h * w),
      pool("pool1", 8, h, w),
      conv("conv2", 8, h1, w1, 16),
      relu("relu2", 16 * h1 * w1),
      pool("pool2", 16, h1, w1),
      conv("conv3", 16, h2, w2, 32),
      relu("relu3", 32 * h2 * w2),
      pool("pool3", 32, h2, w2),
      dense("fc1", 32 * h3 * w3, 64),
      relu("relu4", 64),
      dropout("dropout1", 64, rate),
      dense("fc2", 64, static_cast<std::size_t>(num_classes)),
  };
  a.taps = {{"input", 0}, {"conv1", 2}, {"conv2", 5}, {"conv3", 8}, {"flatten", 9}};
  a.validate();
  return a;
}

nn::Architecture mlp_architecture(std::size_t input, int num_classes, double rate) {
  nn::Architecture a;
  a.id = "mlp";
  a.input_size = input;
  a.layers = {
      dense("fc1", input, 128), relu("relu1", 128), dropout("dropout1", 128, rate),
      dense("fc2", 128, 64),    relu("relu2", 64),  dropout("dropout2", 64, rate),
      dense("fc3", 64, static_cast<std::size_t>(num_classes)),
  };
  a.taps = {{"input", 0}, {"fc1", 2}, {"fc2", 5}, {"flatten", 5}};
  a.validate();
  return a;
}

nn::Architecture head_architecture(std::size_t input, int num_classes, double rate,
                                   std::size_t hidden) {
  if (input == 0) throw DegenerateError("fused head needs a non-empty embedding");
  nn::Architecture a;
  a.id = "head";
  a.input_size = input;
  a.layers = {
      dense("fc1", input, hidden),
      relu("relu1", hidden),
      dropout("dropout1", hidden, rate),
      dense("fc2", hidden, static_cast<std::size_t>(num_classes)),
  };
  a.taps = {{"input", 0}, {"hidden", 2}};
  a.validate();
  return a;
}

namespace {

ClassifierModel build_model(nn::Architecture arch, const Shape& input, int num_classes,
                            const TrainingConfig& config, bool zero_init_output) {
  ClassifierModel m;
  m.model_id = arch.id + "-" + seed_suffix(config.seed);
  m.network = nn::Network<float>(std::move(arch));
  Rng rng(derive_seed(config.seed, "init"));
  m.network.initialize(rng, zero_init_output);
  m.num_classes = num_classes;
  m.input_shape = input;
  m.config = config;
  return m;
}

}  // namespace

ClassifierModel make_classifier(const Shape& input, int num_classes, const TrainingConfig& config,
                                bool zero_init_output) {
  config.validate();
  if (num_classes < 2) throw ConfigError("a classifier needs at least two classes");
  nn::Architecture arch = input.is_image()
                              ? small_cnn_architecture(input, num_classes, config.dropout)
                              : mlp_architecture(input.numel(), num_classes, config.dropout);
  return build_model(std::move(arch), input, num_classes, config, zero_init_output);
}

FloatMatrix as_matrix(const Dataset& d) {
  FloatMatrix m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.sample_size()));
  std::copy(d.samples().begin(), d.samples().end(), m.data());
  return m;
}

FloatMatrix one_hot(std::span<const int> labels, int num_classes) {
  FloatMatrix m = FloatMatrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw InputError("label " + std::to_string(labels[i]) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
    m(static_cast<Eigen::Index>(i), labels[i]) = 1.0f;
  }
  return m;
}

FloatMatrix Standardizer::apply(const FloatMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != mean.size()) {
    throw InputError("standardizer width mismatch");
  }
  FloatMatrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const auto k = static_cast<std::size_t>(c);
      out(r, c) = (x(r, c) - mean[k]) * inv_std[k];
    }
  }
  return out;
}

void fit_classifier(ClassifierModel& model, const FloatMatrix& inputs, std::span<const int> labels,
                    const ClassifierTrainOptions& options) {
  const TrainingConfig& cfg = model.config;
  cfg.validate();
  options.mixup.validate();
  if (inputs.rows() == 0) throw EmptyDatasetError("cannot train on an empty dataset");
  if (static_cast<std::size_t>(inputs.rows()) != labels.size()) {
    throw InputError("fit_classifier: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(inputs.rows()) + " rows");
  }
  if (static_cast<std::size_t>(inputs.cols()) != model.network.architecture().input_size) {
    throw InputError("fit_classifier: input width does not match the model");
  }
  require_two_classes(labels);

  const MixupSpec& mix = options.mixup;
  std::optional<std::size_t> mix_index;
  if (mix.mode == MixupMode::Input) mix_index = 0;
  if (mix.mode == MixupMode::Feature) {
    mix_index = model.network.architecture().tap_index(mix.layer);
    if (!mix_index) throw ConfigError("unknown mixup layer '" + mix.layer + "'");
  }
  if (mix.mode == MixupMode::VaeLatent && options.latent_model == nullptr) {
    throw ConfigError("vae_latent mixup needs a representation model");
  }

  const FloatMatrix targets = one_hot(labels, model.num_classes);
  const auto n = static_cast<std::size_t>(inputs.rows());
  Rng order_rng(derive_seed(cfg.seed, "batches"));
  Rng mix_rng(derive_seed(cfg.seed ^ mix.seed, "mixup"));
  model.network.seed_dropout(derive_seed(cfg.seed, "dropout"));
  detail::Adam adam(model.network.parameters(), cfg.learning_rate);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = detail::batch_order(n, order_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      FloatMatrix x = detail::gather_rows(inputs, rows);
      FloatMatrix y = detail::gather_rows(targets, rows);
      nn::MixHook<float> hook;
      const nn::MixHook<float>* hook_ptr = nullptr;
      if (mix.mode != MixupMode::Off && rows.size() >= 2) {
        const MixPlan plan = draw_mix_plan(rows.size(), mix, mix_rng);
        if (mix.mode == MixupMode::VaeLatent) {
          x = vae_latent_mix_rows(*options.latent_model, x, plan, mix.allow_autoencoder_latent);
          y = apply_mix_plan(x, y, plan).second;
        } else {
          hook.index = *mix_index;
          hook.partner = plan.partner;
          hook.lambda = plan.lambda;
          hook_ptr = &hook;
          y = apply_mix_plan(x, y, plan).second;
        }
      }
      model.network.zero_grad();
      const float loss = detail::classifier_objective(model.network, x, y, cfg.weight_decay, true,
                                                      true, hook_ptr);
      adam.step(model.network.parameters());
      total += static_cast<double>(loss) * static_cast<double>(rows.size());
    }
    model.loss_history.push_back(total / static_cast<double>(n));
  }
}

ClassifierModel train_classifier(const Dataset& data, const TrainingConfig& config,
                                 const ClassifierTrainOptions& options) {
  if (data.empty()) throw EmptyDatasetError("cannot train on an empty dataset");
  if (!data.has_labels()) throw InputError("train_classifier needs labeled data");
  require_two_classes(data.labels());
  ClassifierModel model =
      make_classifier(data.shape(), data.num_classes(), config, options.zero_init_output);
  fit_classifier(model, as_matrix(data), data.labels(), options);
  return model;
}

FloatMatrix predict_proba(const ClassifierModel& model, const FloatMatrix& inputs) {
  const std::size_t width = model.network.architecture().input_size;
  if (static_cast<std::size_t>(inputs.cols()) != width) {
    throw InputError("predict_proba: input width " + std::to_string(inputs.cols()) +
                     " does not match the model input " + std::to_string(width));
  }
  const FloatMatrix x = model.standardizer ? model.standardizer->apply(inputs) : inputs;
  FloatMatrix out(x.rows(), model.num_classes);
  constexpr Eigen::Index chunk = 512;
  for (Eigen::Index start = 0; start < x.rows(); start += chunk) {
    const Eigen::Index len = std::min(chunk, x.rows() - start);
    const FloatMatrix logits = model.network.infer(x.middleRows(start, len));
    const nn::Matrix<double> p = nn::softmax<double>(logits.cast<double>());
    out.middleRows(start, len) = p.cast<float>();
  }
  return out;
}

FloatMatrix predict_proba(const ClassifierModel& model, const Dataset& data) {
  if (data.shape() != model.input_shape) {
    throw InputError("predict_proba: sample shape " + data.shape().to_string() +
                     " does not match the model input " + model.input_shape.to_string());
  }
  return predict_proba(model, as_matrix(data));
}

std::vector<int> argmax_rows(const FloatMatrix& proba) {
  std::vector<int> out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index r = 0; r < proba.rows(); ++r) {
    Eigen::Index best = 0;
    proba.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const FloatMatrix& proba, std::span<const int> labels) {
  if (static_cast<std::size_t>(proba.rows()) != labels.size()) {
    throw InputError("accuracy: row count does not match label count");
  }
  if (labels.empty()) return 0.0;
  const auto pred = argmax_rows(proba);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

double accuracy(const ClassifierModel& model, const Dataset& data) {
  return accuracy(predict_proba(model, data), data.labels());
}

Embedding embed(const ClassifierModel& model, const Dataset& data, std::string_view layer) {
  const auto tap = model.network.architecture().tap_index(layer);
  if (!tap) {
    throw ConfigError("unknown layer '" + std::string(layer) + "' for model " + model.model_id);
  }
  if (data.shape() != model.input_shape) {
    throw InputError("embed: sample shape does not match the model input");
  }
  FloatMatrix x = as_matrix(data);
  if (model.standardizer) x = model.standardizer->apply(x);
  Embedding e;
  e.values = model.network.infer(x, 0, *tap);
  e.ids = data.ids();
  e.source_model = model.model_id;
  e.layer = std::string(layer);
  return e;
}

Embedding empty_embedding(const Dataset& data) {
  Embedding e;
  e.values = FloatMatrix(static_cast<Eigen::Index>(data.size()), 0);
  e.ids = data.ids();
  e.source_model = "none";
  e.layer = "none";
  return e;
}

Embedding concat_embeddings(const Embedding& e_l, const Embedding& e_u) {
  if (e_l.rows() != e_u.rows()) {
    throw ConsistencyError("concat_embeddings: " + std::to_string(e_l.rows()) + " vs " +
                           std::to_string(e_u.rows()) + " rows");
  }
  if (e_l.ids != e_u.ids) throw ConsistencyError("concat_embeddings: row ids are not aligned");
  Embedding w;
  w.values = FloatMatrix(e_l.values.rows(), e_l.values.cols() + e_u.values.cols());
  w.values.leftCols(e_l.values.cols()) = e_l.values;
  w.values.rightCols(e_u.values.cols()) = e_u.values;
  w.ids = e_l.ids;
  w.source_model = e_u.width() == 0 ? e_l.source_model : e_l.source_model + "+" + e_u.source_model;
  w.layer = e_u.width() == 0 ? e_l.layer : e_l.layer + "+" + e_u.layer;
  return w;
}

ClassifierModel train_head(const Embedding& w, std::span<const int> labels, int num_classes,
                           const TrainingConfig& config) {
  if (w.width() == 0) throw DegenerateError("train_head: zero-width embedding");
  if (w.rows() != labels.size()) throw InputError("train_head: label count does not match rows");
  if (w.rows() == 0) throw EmptyDatasetError("train_head: no rows");
  if (!w.values.allFinite()) throw InputError("train_head: non-finite embedding values");
  require_two_classes(labels);
  config.validate();
  if (num_classes < 2) throw ConfigError("a classifier needs at least two classes");

  Standardizer st;
  st.mean.resize(w.width());
  st.inv_std.resize(w.width());
  const double n = static_cast<double>(w.rows());
  for (Eigen::Index c = 0; c < w.values.cols(); ++c) {
    double sum = 0.0, sq = 0.0;
    for (Eigen::Index r = 0; r < w.values.rows(); ++r) sum += w.values(r, c);
    const double mean = sum / n;
    for (Eigen::Index r = 0; r < w.values.rows(); ++r) {
      const double d = w.values(r, c) - mean;
      sq += d * d;
    }
    const double sd = std::sqrt(sq / n);
    st.mean[static_cast<std::size_t>(c)] = static_cast<float>(mean);
    st.inv_std[static_cast<std::size_t>(c)] = sd > 1e-6 ? static_cast<float>(1.0 / sd) : 1.0f;
  }

  ClassifierModel head =
      build_model(head_architecture(w.width(), num_classes, config.dropout), Shape{{w.width()}},
                  num_classes, config, false);
  fit_classifier(head, st.apply(w.values), labels);
  head.standardizer = std::move(st);
  return head;
}

FloatMatrix predict_proba(const ClassifierModel& head, const Embedding& w) {
  return predict_proba(head, w.values);
}

}  // namespace pseudorep
