#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "pseudorep/models.hpp"
#include "pseudorep/random.hpp"

namespace pseudorep::detail {

/// Adam with bias correction. Weight decay enters through the objective's
/// gradient, not here.
class Adam {
 public:
  Adam(const std::vector<nn::Parameter<float>>& params, double learning_rate);
  void step(std::vector<nn::Parameter<float>>& params);

 private:
  double lr_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<FloatMatrix> m_, v_;
};

std::vector<std::size_t> batch_order(std::size_t n, Rng& rng);
FloatMatrix gather_rows(const FloatMatrix& m, std::span<const std::size_t> rows);

}  // namespace pseudorep::detail
