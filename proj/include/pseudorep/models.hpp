#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pseudorep/dataset.hpp"
#include "pseudorep/manifest.hpp"
#include "pseudorep/mixup.hpp"
#include "pseudorep/nn.hpp"

namespace pseudorep {

using FloatMatrix = nn::Matrix<float>;

struct TrainingConfig {
  double learning_rate = 1e-3;
  /// L2 coefficient: the loss gains 0.5 * weight_decay * sum(theta^2).
  double weight_decay = 5e-4;
  double dropout = 0.2;
  std::size_t batch_size = 64;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;

  void validate() const;
  /// Learning rate 0.1 with the same Adam/decay/dropout settings.
  static TrainingConfig high_lr_preset();
};

Json to_json(const TrainingConfig& c);
TrainingConfig training_config_from_json(const Json& j, const TrainingConfig& base = {});

/// Feature standardization fitted on a head's training embeddings.
struct Standardizer {
  std::vector<float> mean;
  std::vector<float> inv_std;
  FloatMatrix apply(const FloatMatrix& x) const;
};

/// Supervised classifier. Image inputs use a 3-block CNN with taps
/// {input, conv1, conv2, conv3, flatten}; 1-D inputs use a 3-layer MLP with
/// taps {input, fc1, fc2, flatten}; fused heads are 2-layer MLPs over
/// embeddings (tap {input, hidden}).
struct ClassifierModel {
  std::string model_id;
  nn::Network<float> network;
  int num_classes = 0;
  Shape input_shape;
  TrainingConfig config;
  std::optional<Standardizer> standardizer;
  std::vector<double> loss_history;

  std::vector<std::string> layer_names() const { return network.architecture().tap_names(); }
};

enum class RepresentationKind { Autoencoder, Vae };

std::string to_string(RepresentationKind kind);

/// Self-supervised encoder/decoder pair. The VAE encoder emits
/// [mean, log-variance] side by side (2 * latent_dim columns).
struct RepresentationModel {
  std::string model_id;
  RepresentationKind kind = RepresentationKind::Autoencoder;
  nn::Network<float> encoder;
  nn::Network<float> decoder;
  std::size_t latent_dim = 0;
  Shape input_shape;
  TrainingConfig config;
  /// Full-data objective before training, then the mean objective per epoch.
  std::vector<double> loss_history;
  std::vector<std::string> warnings;
};

struct Embedding {
  FloatMatrix values;
  std::vector<SampleId> ids;
  std::string source_model;
  std::string layer;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t width() const { return static_cast<std::size_t>(values.cols()); }
};

// ---- architectures -------------------------------------------------------

/// conv(8)-relu-pool, conv(16)-relu-pool, conv(32)-relu-pool, dense(64)-relu-
/// dropout, dense(K). The flatten tap has width 32 * floor(H/8) * floor(W/8).
nn::Architecture small_cnn_architecture(const Shape& input, int num_classes, double dropout);
nn::Architecture mlp_architecture(std::size_t input, int num_classes, double dropout);
nn::Architecture head_architecture(std::size_t input, int num_classes, double dropout,
                                   std::size_t hidden = 64);

/// Untrained classifier for the given input (CNN for images, MLP for 1-D).
ClassifierModel make_classifier(const Shape& input, int num_classes,
                                const TrainingConfig& config, bool zero_init_output = false);

// ---- data plumbing -------------------------------------------------------

FloatMatrix as_matrix(const Dataset& d);
FloatMatrix one_hot(std::span<const int> labels, int num_classes);

// ---- classifier ----------------------------------------------------------

struct ClassifierTrainOptions {
  MixupSpec mixup;
  /// Required for MixupMode::VaeLatent.
  const RepresentationModel* latent_model = nullptr;
  bool zero_init_output = false;
};

/// Minibatch Adam on cross-entropy + 0.5 * weight_decay * ||theta||^2.
/// Throws DegenerateError when fewer than two distinct labels are present.
ClassifierModel train_classifier(const Dataset& data, const TrainingConfig& config,
                                 const ClassifierTrainOptions& options = {});

/// Same loop starting from an existing (possibly custom) model.
void fit_classifier(ClassifierModel& model, const FloatMatrix& inputs,
                    std::span<const int> labels, const ClassifierTrainOptions& options = {});

/// Softmax probabilities in inference mode; rows sum to 1.
FloatMatrix predict_proba(const ClassifierModel& model, const FloatMatrix& inputs);
FloatMatrix predict_proba(const ClassifierModel& model, const Dataset& data);

std::vector<int> argmax_rows(const FloatMatrix& proba);
double accuracy(const FloatMatrix& proba, std::span<const int> labels);
double accuracy(const ClassifierModel& model, const Dataset& data);

/// Activations entering tap `layer` in inference mode.
Embedding embed(const ClassifierModel& model, const Dataset& data, std::string_view layer = "flatten");
/// Encoder output (VAE: the mean).
Embedding embed(const RepresentationModel& model, const Dataset& data);
/// Zero-width embedding with the row ids of `data` (ablation stub).
Embedding empty_embedding(const Dataset& data);

// ---- representation learning --------------------------------------------

RepresentationModel train_autoencoder(const Dataset& data, std::size_t latent_dim,
                                      const TrainingConfig& config);
RepresentationModel train_vae(const Dataset& data, std::size_t latent_dim,
                              const TrainingConfig& config);

FloatMatrix encode_mean(const RepresentationModel& model, const FloatMatrix& inputs);
/// VAE only: {mean, log-variance}.
std::pair<FloatMatrix, FloatMatrix> encode_gaussian(const RepresentationModel& model,
                                                    const FloatMatrix& inputs);
/// Decoder output after the sigmoid, in [0, 1].
FloatMatrix decode(const RepresentationModel& model, const FloatMatrix& latent);
FloatMatrix reconstruct(const RepresentationModel& model, const FloatMatrix& inputs);
double reconstruction_mse(const RepresentationModel& model, const Dataset& data);
/// Mean per-sample KL(q(z|x) || N(0, I)); VAE only.
double kl_divergence(const RepresentationModel& model, const Dataset& data);

// ---- fused head ------------------------------------------------------------

/// W = [e_l | e_u]. Row ids must agree in order.
Embedding concat_embeddings(const Embedding& e_l, const Embedding& e_u);

/// MLP head on fixed embeddings (standardized per column on the training
/// rows). Upstream models are never touched.
ClassifierModel train_head(const Embedding& w, std::span<const int> labels, int num_classes,
                           const TrainingConfig& config);
FloatMatrix predict_proba(const ClassifierModel& head, const Embedding& w);

// ---- confidence ----------------------------------------------------------

enum class ConfidenceMetric { MaxProb, NegEntropy };

std::string to_string(ConfidenceMetric m);
ConfidenceMetric parse_confidence_metric(const std::string& name);

/// max_prob: row maximum. neg_entropy: sum_c p_c log p_c (0 log 0 = 0).
/// Throws InputError if a row is negative or does not sum to 1 within 1e-4.
std::vector<double> score_confidence(const FloatMatrix& proba, ConfidenceMetric metric);

// ---- gradient verification ----------------------------------------------

struct GradientCheckOptions {
  double step = 1e-4;
  /// Check at most this many parameters (uniformly sampled); 0 = all.
  std::size_t max_parameters = 0;
  std::uint64_t seed = 0;
  /// Denominator floor of the relative error.
  double floor = 1e-6;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst_parameter;
};

/// Analytic vs central-difference gradients of the full training loss
/// (cross-entropy + weight decay, dropout disabled), on a float64 copy of the
/// parameters. Relative error = |a - n| / max(|a|, |n|, floor).
GradientCheckResult gradient_check(const ClassifierModel& model, const FloatMatrix& inputs,
                                   std::span<const int> labels,
                                   const GradientCheckOptions& options = {});

/// Autoencoder: reconstruction MSE. VAE: BCE + KL with the reparameterization
/// noise pinned to `noise` (batch x latent_dim; drawn from options.seed when
/// empty).
GradientCheckResult gradient_check(const RepresentationModel& model, const FloatMatrix& inputs,
                                   const FloatMatrix& noise = {},
                                   const GradientCheckOptions& options = {});

}  // namespace pseudorep
