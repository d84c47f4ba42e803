#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "model_losses.hpp"
#include "pseudorep/errors.hpp"
#include "pseudorep/models.hpp"

namespace pseudorep {

namespace {

using DMatrix = nn::Matrix<double>;
constexpr Eigen::Index kMaxBatch = 8;

struct Coordinate {
  nn::Parameter<double>* param;
  Eigen::Index index;
  std::string label;
};

std::vector<Coordinate> coordinates(std::vector<std::pair<std::string, nn::Network<double>*>> nets) {
  std::vector<Coordinate> out;
  for (auto& [prefix, net] : nets) {
    for (auto& p : net->parameters()) {
      for (Eigen::Index i = 0; i < p.value.size(); ++i) {
        out.push_back({&p, i, prefix + p.name + "[" + std::to_string(i) + "]"});
      }
    }
  }
  return out;
}

GradientCheckResult run_check(std::vector<Coordinate> coords,
                              const std::function<double(bool)>& objective,
                              const std::function<void()>& zero_grad,
                              const GradientCheckOptions& options) {
  if (options.max_parameters > 0 && coords.size() > options.max_parameters) {
    Rng rng(derive_seed(options.seed, "gradient-check"));
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_parameters);
  }
  zero_grad();
  objective(true);
  GradientCheckResult result;
  const double h = options.step;
  for (const auto& c : coords) {
    double& theta = c.param->value.data()[c.index];
    const double analytic = c.param->grad.data()[c.index];
    const double saved = theta;
    theta = saved + h;
    const double up = objective(false);
    theta = saved - h;
    const double down = objective(false);
    theta = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
    const double rel = std::abs(analytic - numeric) / denom;
    ++result.checked;
    if (rel > result.max_relative_error || result.worst_parameter.empty()) {
      result.max_relative_error = rel;
      result.worst_parameter = c.label;
    }
  }
  return result;
}

void check_batch(Eigen::Index rows) {
  if (rows == 0) throw InputError("gradient_check needs a non-empty batch");
  if (rows > kMaxBatch) throw InputError("gradient_check batches are limited to 8 samples");
}

}  // namespace

GradientCheckResult gradient_check(const ClassifierModel& model, const FloatMatrix& inputs,
                                   std::span<const int> labels,
                                   const GradientCheckOptions& options) {
  check_batch(inputs.rows());
  if (labels.size() != static_cast<std::size_t>(inputs.rows())) {
    throw InputError("gradient_check: label count does not match rows");
  }
  nn::Network<double> net(model.network.architecture());
  net.copy_parameters_from(model.network);
  const FloatMatrix xs = model.standardizer ? model.standardizer->apply(inputs) : inputs;
  const DMatrix x = xs.cast<double>();
  const DMatrix y = one_hot(labels, model.num_classes).cast<double>();
  const double wd = model.config.weight_decay;
  auto objective = [&](bool backward) {
    return detail::classifier_objective(net, x, y, wd, false, backward);
  };
  return run_check(coordinates({{"", &net}}), objective, [&] { net.zero_grad(); }, options);
}

GradientCheckResult gradient_check(const RepresentationModel& model, const FloatMatrix& inputs,
                                   const FloatMatrix& noise, const GradientCheckOptions& options) {
  check_batch(inputs.rows());
  nn::Network<double> enc(model.encoder.architecture());
  nn::Network<double> dec(model.decoder.architecture());
  enc.copy_parameters_from(model.encoder);
  dec.copy_parameters_from(model.decoder);
  const DMatrix x = inputs.cast<double>();
  const double wd = model.config.weight_decay;
  DMatrix eps;
  if (model.kind == RepresentationKind::Vae) {
    if (noise.size() == 0) {
      Rng rng(derive_seed(options.seed, "pinned-noise"));
      std::normal_distribution<double> normal(0.0, 1.0);
      eps.resize(x.rows(), static_cast<Eigen::Index>(model.latent_dim));
      for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = normal(rng);
    } else {
      if (noise.rows() != x.rows() ||
          static_cast<std::size_t>(noise.cols()) != model.latent_dim) {
        throw InputError("gradient_check: noise must be batch x latent_dim");
      }
      eps = noise.cast<double>();
    }
  }
  auto objective = [&](bool backward) {
    if (model.kind == RepresentationKind::Vae) {
      return detail::vae_objective(enc, dec, x, eps, wd, backward);
    }
    return detail::autoencoder_objective(enc, dec, x, wd, backward);
  };
  auto zero = [&] {
    enc.zero_grad();
    dec.zero_grad();
  };
  return run_check(coordinates({{"encoder.", &enc}, {"decoder.", &dec}}), objective, zero,
                   options);
}

}  // namespace pseudorep
