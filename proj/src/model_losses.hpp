#pragma once

// Training objectives shared by the float training loops and the float64
// gradient checker, so the checked gradients are the ones training uses.

#include <cmath>

#include "pseudorep/nn.hpp"

namespace pseudorep::detail {

template <typename T>
T weight_penalty(nn::Network<T>& net, double weight_decay, bool accumulate_grad) {
  if (weight_decay == 0.0) return T(0);
  const T wd = static_cast<T>(weight_decay);
  T sq = 0;
  for (auto& p : net.parameters()) {
    sq += p.value.squaredNorm();
    if (accumulate_grad) p.grad += wd * p.value;
  }
  return T(0.5) * wd * sq;
}

/// Cross-entropy + 0.5 * wd * ||theta||^2. Gradients are accumulated when
/// `backward` is set (call zero_grad() first).
template <typename T>
T classifier_objective(nn::Network<T>& net, const nn::Matrix<T>& x, const nn::Matrix<T>& targets,
                       double weight_decay, bool training, bool backward,
                       const nn::MixHook<T>* mix = nullptr) {
  const nn::Matrix<T>& logits = net.forward(x, training, mix);
  nn::Matrix<T> grad;
  T loss = nn::softmax_cross_entropy(logits, targets, grad);
  if (backward) net.backward(grad);
  return loss + weight_penalty(net, weight_decay, backward);
}

template <typename T>
T autoencoder_objective(nn::Network<T>& encoder, nn::Network<T>& decoder,
                        const nn::Matrix<T>& x, double weight_decay, bool backward) {
  const nn::Matrix<T> z = encoder.forward(x, false);
  const nn::Matrix<T>& logits = decoder.forward(z, false);
  nn::Matrix<T> grad;
  T loss = nn::sigmoid_mse(logits, x, grad);
  if (backward) {
    const nn::Matrix<T> gz = decoder.backward(grad, true);
    encoder.backward(gz);
  }
  return loss + weight_penalty(encoder, weight_decay, backward) +
         weight_penalty(decoder, weight_decay, backward);
}

struct VaeTerms {
  double reconstruction = 0.0;
  double kl = 0.0;
};

/// Per-sample summed BCE + KL(q(z|x) || N(0, I)), averaged over the batch,
/// with z = mean + exp(logvar / 2) * noise.
template <typename T>
T vae_objective(nn::Network<T>& encoder, nn::Network<T>& decoder, const nn::Matrix<T>& x,
                const nn::Matrix<T>& noise, double weight_decay, bool backward,
                VaeTerms* terms = nullptr) {
  const nn::Matrix<T> stats = encoder.forward(x, false);
  const Eigen::Index latent = noise.cols();
  const nn::Matrix<T> mean = stats.leftCols(latent);
  const nn::Matrix<T> logvar = stats.rightCols(latent);
  const nn::Matrix<T> sd = (logvar.array() * T(0.5)).exp().matrix();
  const nn::Matrix<T> z = mean + sd.cwiseProduct(noise);
  const nn::Matrix<T>& logits = decoder.forward(z, false);
  nn::Matrix<T> grad;
  const T recon = nn::sigmoid_bce(logits, x, grad);
  const T n = static_cast<T>(x.rows());
  const T kl = T(-0.5) *
               (T(1) + logvar.array() - mean.array().square() - logvar.array().exp()).sum() / n;
  if (terms) {
    terms->reconstruction = static_cast<double>(recon);
    terms->kl = static_cast<double>(kl);
  }
  if (backward) {
    const nn::Matrix<T> gz = decoder.backward(grad, true);
    nn::Matrix<T> gstats(stats.rows(), stats.cols());
    gstats.leftCols(latent) = gz + mean / n;
    gstats.rightCols(latent) =
        (gz.array() * noise.array() * sd.array() * T(0.5) +
         (logvar.array().exp() - T(1)) * (T(0.5) / n))
            .matrix();
    encoder.backward(gstats);
  }
  return recon + kl + weight_penalty(encoder, weight_decay, backward) +
         weight_penalty(decoder, weight_decay, backward);
}

}  // namespace pseudorep::detail
