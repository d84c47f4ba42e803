#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pseudorep/nn.hpp"
#include "pseudorep/random.hpp"

namespace pseudorep {

struct ClassifierModel;
struct RepresentationModel;

enum class MixupMode { Off, Input, Feature, VaeLatent };

std::string to_string(MixupMode mode);
MixupMode parse_mixup_mode(const std::string& name);

struct MixupSpec {
  MixupMode mode = MixupMode::Off;
  /// Tap to mix at when mode == Feature.
  std::string layer;
  /// lambda ~ Beta(beta_a, beta_a).
  double beta_a = 1.0;
  std::uint64_t seed = 0;
  /// Permit a plain autoencoder where VAE-latent mixing expects a VAE.
  bool allow_autoencoder_latent = false;

  void validate() const;
  static MixupSpec feature(std::string layer = "conv2") {
    return {MixupMode::Feature, std::move(layer)};
  }
};

/// The one convex-combination rule every mixing path uses.
inline float mix_value(float lam, float a, float b) { return lam * a + (1.0f - lam) * b; }

double sample_lambda(const MixupSpec& spec, Rng& rng);

struct MixedPair {
  std::vector<float> x;
  std::vector<float> y;
};

/// x = lam * x1 + (1 - lam) * x2 and the same for the label vectors.
MixedPair mixup_pair(std::span<const float> x1, std::span<const float> y1,
                     std::span<const float> x2, std::span<const float> y2, double lam);

/// Partner permutation and per-pair lambdas for a batch.
struct MixPlan {
  std::vector<std::size_t> partner;
  std::vector<float> lambda;
};

MixPlan draw_mix_plan(std::size_t batch_size, const MixupSpec& spec, Rng& rng);

/// Rows mixed with their partners; labels mixed with the same lambdas.
std::pair<nn::Matrix<float>, nn::Matrix<float>> apply_mix_plan(
    const nn::Matrix<float>& rows, const nn::Matrix<float>& labels, const MixPlan& plan);

struct FeatureMixBatch {
  std::size_t tap_index = 0;
  nn::Matrix<float> activations;  // mixed activations at the tap
  nn::Matrix<float> labels;       // mixed label rows
  MixPlan plan;
};

/// Forward-propagates `samples` to `layer`, then mixes activations and
/// one-hot/soft label rows under a seeded pairing. With layer == "input" this
/// is exactly input-space Mixup.
FeatureMixBatch feature_mixup_batch(const ClassifierModel& model, const std::string& layer,
                                    const nn::Matrix<float>& samples,
                                    const nn::Matrix<float>& labels, const MixupSpec& spec,
                                    Rng& rng);

/// decode(lam * mean(x1) + (1 - lam) * mean(x2)); output in [0, 1].
std::vector<float> vae_latent_mixup(const RepresentationModel& vae, std::span<const float> x1,
                                    std::span<const float> x2, double lam,
                                    bool allow_autoencoder = false);

/// Batched form of vae_latent_mixup under a mix plan.
nn::Matrix<float> vae_latent_mix_rows(const RepresentationModel& vae,
                                      const nn::Matrix<float>& rows, const MixPlan& plan,
                                      bool allow_autoencoder = false);

}  // namespace pseudorep
