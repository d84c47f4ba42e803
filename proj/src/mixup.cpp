#include "pseudorep/mixup.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pseudorep/errors.hpp"
#include "pseudorep/models.hpp"

namespace pseudorep {

std::string to_string(MixupMode mode) {
  switch (mode) {
    case MixupMode::Off: return "off";
    case MixupMode::Input: return "input";
    case MixupMode::Feature: return "feature";
    case MixupMode::VaeLatent: return "vae_latent";
  }
  return "off";
}

MixupMode parse_mixup_mode(const std::string& name) {
  if (name == "off") return MixupMode::Off;
  if (name == "input") return MixupMode::Input;
  if (name == "feature") return MixupMode::Feature;
  if (name == "vae_latent") return MixupMode::VaeLatent;
  throw ConfigError("unknown mixup mode '" + name + "'");
}

void MixupSpec::validate() const {
  if (!(beta_a > 0.0) || !std::isfinite(beta_a)) throw ConfigError("mixup beta_a must be positive");
  if (mode == MixupMode::Feature && layer.empty()) {
    throw ConfigError("mixup layer is required in feature mode");
  }
  if (mode != MixupMode::Feature && !layer.empty()) {
    throw ConfigError("mixup layer is only valid in feature mode");
  }
}

double sample_lambda(const MixupSpec& spec, Rng& rng) {
  std::gamma_distribution<double> gamma(spec.beta_a, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  if (x + y <= 0.0) return 0.5;
  return std::clamp(x / (x + y), 0.0, 1.0);
}

MixedPair mixup_pair(std::span<const float> x1, std::span<const float> y1,
                     std::span<const float> x2, std::span<const float> y2, double lam) {
  if (x1.size() != x2.size()) throw InputError("mixup_pair: sample shapes differ");
  if (y1.size() != y2.size()) throw InputError("mixup_pair: label lengths differ");
  if (!(lam >= 0.0 && lam <= 1.0)) throw InputError("mixup_pair: lambda outside [0, 1]");
  const auto l = static_cast<float>(lam);
  MixedPair out;
  out.x.resize(x1.size());
  out.y.resize(y1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) out.x[i] = mix_value(l, x1[i], x2[i]);
  for (std::size_t i = 0; i < y1.size(); ++i) out.y[i] = mix_value(l, y1[i], y2[i]);
  return out;
}

MixPlan draw_mix_plan(std::size_t batch_size, const MixupSpec& spec, Rng& rng) {
  if (batch_size < 2) throw DegenerateError("mixup needs a batch of at least 2");
  MixPlan plan;
  plan.partner.resize(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) plan.partner[i] = i;
  std::shuffle(plan.partner.begin(), plan.partner.end(), rng);
  plan.lambda.resize(batch_size);
  for (auto& l : plan.lambda) l = static_cast<float>(sample_lambda(spec, rng));
  return plan;
}

namespace {

nn::Matrix<float> mix_rows(const nn::Matrix<float>& m, const MixPlan& plan) {
  nn::Matrix<float> out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto j = static_cast<Eigen::Index>(plan.partner[static_cast<std::size_t>(r)]);
    const float lam = plan.lambda[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = mix_value(lam, m(r, c), m(j, c));
  }
  return out;
}

void check_plan(const MixPlan& plan, Eigen::Index rows) {
  if (plan.partner.size() != static_cast<std::size_t>(rows) ||
      plan.lambda.size() != plan.partner.size()) {
    throw InputError("mix plan does not match the batch size");
  }
}

}  // namespace

std::pair<nn::Matrix<float>, nn::Matrix<float>> apply_mix_plan(const nn::Matrix<float>& rows,
                                                               const nn::Matrix<float>& labels,
                                                               const MixPlan& plan) {
  check_plan(plan, rows.rows());
  if (labels.rows() != rows.rows()) throw InputError("mixup: label rows differ from sample rows");
  return {mix_rows(rows, plan), mix_rows(labels, plan)};
}

FeatureMixBatch feature_mixup_batch(const ClassifierModel& model, const std::string& layer,
                                    const nn::Matrix<float>& samples,
                                    const nn::Matrix<float>& labels, const MixupSpec& spec,
                                    Rng& rng) {
  const auto& arch = model.network.architecture();
  const auto tap = arch.tap_index(layer);
  if (!tap) throw ConfigError("unknown layer '" + layer + "' for model " + model.model_id);
  if (samples.rows() < 2) throw DegenerateError("feature mixup needs a batch of at least 2");
  if (static_cast<std::size_t>(samples.cols()) != arch.input_size) {
    throw InputError("feature mixup: sample width does not match the model input");
  }
  FeatureMixBatch out;
  out.tap_index = *tap;
  out.plan = draw_mix_plan(static_cast<std::size_t>(samples.rows()), spec, rng);
  const nn::Matrix<float> acts = model.network.infer(samples, 0, *tap);
  auto [x, y] = apply_mix_plan(acts, labels, out.plan);
  out.activations = std::move(x);
  out.labels = std::move(y);
  return out;
}

namespace {

void require_latent_model(const RepresentationModel& model, bool allow_autoencoder) {
  if (model.kind != RepresentationKind::Vae && !allow_autoencoder) {
    throw ConfigError("latent mixup requires a VAE (model " + model.model_id + " is " +
                      to_string(model.kind) + ")");
  }
}

}  // namespace

std::vector<float> vae_latent_mixup(const RepresentationModel& vae, std::span<const float> x1,
                                    std::span<const float> x2, double lam,
                                    bool allow_autoencoder) {
  require_latent_model(vae, allow_autoencoder);
  if (x1.size() != x2.size() || x1.size() != vae.input_shape.numel()) {
    throw InputError("vae_latent_mixup: sample shape does not match the model input");
  }
  if (!(lam >= 0.0 && lam <= 1.0)) throw InputError("vae_latent_mixup: lambda outside [0, 1]");
  FloatMatrix x(2, static_cast<Eigen::Index>(x1.size()));
  for (std::size_t i = 0; i < x1.size(); ++i) {
    x(0, static_cast<Eigen::Index>(i)) = x1[i];
    x(1, static_cast<Eigen::Index>(i)) = x2[i];
  }
  const FloatMatrix mu = encode_mean(vae, x);
  const auto l = static_cast<float>(lam);
  FloatMatrix z(1, mu.cols());
  for (Eigen::Index c = 0; c < mu.cols(); ++c) z(0, c) = mix_value(l, mu(0, c), mu(1, c));
  const FloatMatrix out = decode(vae, z);
  return {out.data(), out.data() + out.size()};
}

nn::Matrix<float> vae_latent_mix_rows(const RepresentationModel& vae,
                                      const nn::Matrix<float>& rows, const MixPlan& plan,
                                      bool allow_autoencoder) {
  require_latent_model(vae, allow_autoencoder);
  check_plan(plan, rows.rows());
  return decode(vae, mix_rows(encode_mean(vae, rows), plan));
}

}  // namespace pseudorep
