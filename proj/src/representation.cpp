#include <algorithm>
#include <random>

#include "model_losses.hpp"
#include "pseudorep/errors.hpp"
#include "pseudorep/models.hpp"
#include "training_internal.hpp"

namespace pseudorep {

namespace {

constexpr std::size_t kHidden = 128;

nn::Architecture two_layer(std::string id, std::size_t in, std::size_t hidden, std::size_t out) {
  nn::Architecture a;
  a.id = std::move(id);
  a.input_size = in;
  nn::LayerSpec fc1;
  fc1.kind = nn::LayerKind::Dense;
  fc1.name = "fc1";
  fc1.in_features = in;
  fc1.out_features = hidden;
  nn::LayerSpec act;
  act.kind = nn::LayerKind::ReLU;
  act.name = "relu1";
  act.in_features = hidden;
  nn::LayerSpec fc2;
  fc2.kind = nn::LayerKind::Dense;
  fc2.name = "fc2";
  fc2.in_features = hidden;
  fc2.out_features = out;
  a.layers = {fc1, act, fc2};
  a.taps = {{"input", 0}, {"hidden", 2}, {"output", 3}};
  a.validate();
  return a;
}

RepresentationModel make_representation(const Dataset& data, std::size_t latent_dim,
                                        const TrainingConfig& config, RepresentationKind kind) {
  config.validate();
  if (data.empty()) throw EmptyDatasetError("cannot train a representation on an empty dataset");
  if (latent_dim == 0) throw ConfigError("latent_dim must be positive");
  const std::size_t d = data.sample_size();
  RepresentationModel m;
  m.kind = kind;
  m.latent_dim = latent_dim;
  m.input_shape = data.shape();
  m.config = config;
  const std::string prefix = kind == RepresentationKind::Vae ? "vae" : "ae";
  m.model_id = prefix + "-" + std::to_string(latent_dim) + "-" +
               std::to_string(derive_seed(config.seed, "id") & 0xffffffffULL);
  const std::size_t enc_out = kind == RepresentationKind::Vae ? 2 * latent_dim : latent_dim;
  m.encoder = nn::Network<float>(two_layer(prefix + "_encoder", d, kHidden, enc_out));
  m.decoder = nn::Network<float>(two_layer(prefix + "_decoder", latent_dim, kHidden, d));
  Rng enc_rng(derive_seed(config.seed, "encoder"));
  Rng dec_rng(derive_seed(config.seed, "decoder"));
  m.encoder.initialize(enc_rng);
  m.decoder.initialize(dec_rng);
  if (latent_dim >= d) {
    m.warnings.push_back("latent_dim " + std::to_string(latent_dim) +
                         " is not smaller than the input dimension " + std::to_string(d));
  }
  return m;
}

FloatMatrix draw_noise(Eigen::Index rows, std::size_t latent, Rng& rng) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  FloatMatrix eps(rows, static_cast<Eigen::Index>(latent));
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = normal(rng);
  return eps;
}

void fit_representation(RepresentationModel& m, const FloatMatrix& x) {
  const TrainingConfig& cfg = m.config;
  const auto n = static_cast<std::size_t>(x.rows());
  Rng order_rng(derive_seed(cfg.seed, "batches"));
  Rng noise_rng(derive_seed(cfg.seed, "reparam"));
  detail::Adam enc_opt(m.encoder.parameters(), cfg.learning_rate);
  detail::Adam dec_opt(m.decoder.parameters(), cfg.learning_rate);
  const bool vae = m.kind == RepresentationKind::Vae;

  auto objective = [&](const FloatMatrix& batch, bool backward, Rng& rng) {
    if (vae) {
      const FloatMatrix eps = draw_noise(batch.rows(), m.latent_dim, rng);
      return static_cast<double>(
          detail::vae_objective(m.encoder, m.decoder, batch, eps, cfg.weight_decay, backward));
    }
    return static_cast<double>(
        detail::autoencoder_objective(m.encoder, m.decoder, batch, cfg.weight_decay, backward));
  };

  Rng probe_rng(derive_seed(cfg.seed, "initial"));
  m.loss_history.push_back(objective(x, false, probe_rng));
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = detail::batch_order(n, order_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const FloatMatrix batch = detail::gather_rows(x, rows);
      m.encoder.zero_grad();
      m.decoder.zero_grad();
      total += objective(batch, true, noise_rng) * static_cast<double>(rows.size());
      enc_opt.step(m.encoder.parameters());
      dec_opt.step(m.decoder.parameters());
    }
    m.loss_history.push_back(total / static_cast<double>(n));
  }
}

void check_input(const RepresentationModel& m, const FloatMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != m.encoder.architecture().input_size) {
    throw InputError("representation input width " + std::to_string(x.cols()) +
                     " does not match the model input " +
                     std::to_string(m.encoder.architecture().input_size));
  }
}

}  // namespace

std::string to_string(RepresentationKind kind) {
  return kind == RepresentationKind::Vae ? "vae" : "autoencoder";
}

RepresentationModel train_autoencoder(const Dataset& data, std::size_t latent_dim,
                                      const TrainingConfig& config) {
  RepresentationModel m = make_representation(data, latent_dim, config, RepresentationKind::Autoencoder);
  fit_representation(m, as_matrix(data));
  return m;
}

RepresentationModel train_vae(const Dataset& data, std::size_t latent_dim,
                              const TrainingConfig& config) {
  RepresentationModel m = make_representation(data, latent_dim, config, RepresentationKind::Vae);
  fit_representation(m, as_matrix(data));
  return m;
}

FloatMatrix encode_mean(const RepresentationModel& model, const FloatMatrix& inputs) {
  check_input(model, inputs);
  FloatMatrix out = model.encoder.infer(inputs);
  if (model.kind == RepresentationKind::Vae) {
    return out.leftCols(static_cast<Eigen::Index>(model.latent_dim));
  }
  return out;
}

std::pair<FloatMatrix, FloatMatrix> encode_gaussian(const RepresentationModel& model,
                                                    const FloatMatrix& inputs) {
  if (model.kind != RepresentationKind::Vae) {
    throw ConfigError("encode_gaussian requires a VAE");
  }
  check_input(model, inputs);
  const FloatMatrix out = model.encoder.infer(inputs);
  const auto l = static_cast<Eigen::Index>(model.latent_dim);
  return {out.leftCols(l), out.rightCols(l)};
}

FloatMatrix decode(const RepresentationModel& model, const FloatMatrix& latent) {
  if (static_cast<std::size_t>(latent.cols()) != model.latent_dim) {
    throw InputError("decode: latent width does not match latent_dim");
  }
  return nn::sigmoid<float>(model.decoder.infer(latent));
}

FloatMatrix reconstruct(const RepresentationModel& model, const FloatMatrix& inputs) {
  return decode(model, encode_mean(model, inputs));
}

double reconstruction_mse(const RepresentationModel& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  const FloatMatrix x = as_matrix(data);
  const FloatMatrix r = reconstruct(model, x);
  return (r - x).cast<double>().squaredNorm() / static_cast<double>(x.size());
}

double kl_divergence(const RepresentationModel& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  const auto [mean, logvar] = encode_gaussian(model, as_matrix(data));
  const nn::Matrix<double> m = mean.cast<double>(), lv = logvar.cast<double>();
  const double kl = -0.5 * (1.0 + lv.array() - m.array().square() - lv.array().exp()).sum();
  return kl / static_cast<double>(data.size());
}

Embedding embed(const RepresentationModel& model, const Dataset& data) {
  Embedding e;
  e.values = encode_mean(model, as_matrix(data));
  e.ids = data.ids();
  e.source_model = model.model_id;
  e.layer = "encoder";
  return e;
}

}  // namespace pseudorep
