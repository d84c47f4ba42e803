#pragma once

// Template definitions for nn.hpp. Included from nn.hpp only.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>

namespace pseudorep::nn {
namespace detail {

template <typename T>
void im2col(const Matrix<T>& in, const LayerSpec& s, Matrix<T>& cols) {
  const std::size_t batch = static_cast<std::size_t>(in.rows());
  const std::size_t h = s.height, w = s.width, hw = h * w, k = s.kernel;
  const long pad = static_cast<long>(k / 2);
  cols.resize(static_cast<Eigen::Index>(s.channels * k * k),
              static_cast<Eigen::Index>(batch * hw));
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* row = cols.row(static_cast<Eigen::Index>((c * k + ky) * k + kx)).data();
        const long oy = static_cast<long>(ky) - pad, ox = static_cast<long>(kx) - pad;
        for (std::size_t b = 0; b < batch; ++b) {
          const T* plane = in.row(static_cast<Eigen::Index>(b)).data() + c * hw;
          T* dst = row + b * hw;
          for (std::size_t y = 0; y < h; ++y) {
            const long iy = static_cast<long>(y) + oy;
            if (iy < 0 || iy >= static_cast<long>(h)) {
              std::fill(dst + y * w, dst + (y + 1) * w, T(0));
              continue;
            }
            const T* src = plane + static_cast<std::size_t>(iy) * w;
            for (std::size_t x = 0; x < w; ++x) {
              const long ix = static_cast<long>(x) + ox;
              dst[y * w + x] = (ix < 0 || ix >= static_cast<long>(w))
                                   ? T(0)
                                   : src[static_cast<std::size_t>(ix)];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const Matrix<T>& cols, const LayerSpec& s, Matrix<T>& grad_in) {
  const std::size_t batch = static_cast<std::size_t>(grad_in.rows());
  const std::size_t h = s.height, w = s.width, hw = h * w, k = s.kernel;
  const long pad = static_cast<long>(k / 2);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* row = cols.row(static_cast<Eigen::Index>((c * k + ky) * k + kx)).data();
        const long oy = static_cast<long>(ky) - pad, ox = static_cast<long>(kx) - pad;
        for (std::size_t b = 0; b < batch; ++b) {
          T* plane = grad_in.row(static_cast<Eigen::Index>(b)).data() + c * hw;
          const T* src = row + b * hw;
          for (std::size_t y = 0; y < h; ++y) {
            const long iy = static_cast<long>(y) + oy;
            if (iy < 0 || iy >= static_cast<long>(h)) continue;
            T* dst = plane + static_cast<std::size_t>(iy) * w;
            for (std::size_t x = 0; x < w; ++x) {
              const long ix = static_cast<long>(x) + ox;
              if (ix >= 0 && ix < static_cast<long>(w)) dst[ix] += src[y * w + x];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv_forward(const LayerSpec& s, const Matrix<T>& weight, const Matrix<T>& bias,
                  const Matrix<T>& in, Matrix<T>& out, Matrix<T>& cols) {
  im2col(in, s, cols);
  const Matrix<T> prod = weight * cols;  // filters x (batch * hw)
  const std::size_t batch = static_cast<std::size_t>(in.rows());
  const std::size_t hw = s.height * s.width;
  out.resize(in.rows(), static_cast<Eigen::Index>(s.filters * hw));
  for (std::size_t b = 0; b < batch; ++b) {
    T* dst = out.row(static_cast<Eigen::Index>(b)).data();
    for (std::size_t f = 0; f < s.filters; ++f) {
      const T* src = prod.row(static_cast<Eigen::Index>(f)).data() + b * hw;
      const T bf = bias(0, static_cast<Eigen::Index>(f));
      for (std::size_t p = 0; p < hw; ++p) dst[f * hw + p] = src[p] + bf;
    }
  }
}

template <typename T>
void conv_backward(const LayerSpec& s, const Matrix<T>& weight, const Matrix<T>& cols,
                   const Matrix<T>& grad_out, Matrix<T>& grad_w, Matrix<T>& grad_b,
                   Matrix<T>* grad_in) {
  const std::size_t batch = static_cast<std::size_t>(grad_out.rows());
  const std::size_t hw = s.height * s.width;
  Matrix<T> g(static_cast<Eigen::Index>(s.filters), static_cast<Eigen::Index>(batch * hw));
  for (std::size_t b = 0; b < batch; ++b) {
    const T* src = grad_out.row(static_cast<Eigen::Index>(b)).data();
    for (std::size_t f = 0; f < s.filters; ++f) {
      std::memcpy(g.row(static_cast<Eigen::Index>(f)).data() + b * hw, src + f * hw,
                  hw * sizeof(T));
    }
  }
  grad_w.noalias() += g * cols.transpose();
  grad_b += g.rowwise().sum().transpose();
  if (grad_in) {
    const Matrix<T> dcols = weight.transpose() * g;
    grad_in->setZero(grad_out.rows(), static_cast<Eigen::Index>(s.channels * hw));
    col2im_add(dcols, s, *grad_in);
  }
}

template <typename T>
void pool_forward(const LayerSpec& s, const Matrix<T>& in, Matrix<T>& out,
                  std::vector<std::uint32_t>* argmax) {
  const std::size_t h = s.height, w = s.width, ho = h / 2, wo = w / 2;
  const std::size_t batch = static_cast<std::size_t>(in.rows());
  out.resize(in.rows(), static_cast<Eigen::Index>(s.channels * ho * wo));
  if (argmax) argmax->resize(batch * s.channels * ho * wo);
  for (std::size_t b = 0; b < batch; ++b) {
    const T* src = in.row(static_cast<Eigen::Index>(b)).data();
    T* dst = out.row(static_cast<Eigen::Index>(b)).data();
    for (std::size_t c = 0; c < s.channels; ++c) {
      const T* plane = src + c * h * w;
      for (std::size_t oy = 0; oy < ho; ++oy) {
        for (std::size_t ox = 0; ox < wo; ++ox) {
          std::size_t best = (2 * oy) * w + 2 * ox;
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t idx = (2 * oy + dy) * w + 2 * ox + dx;
              if (plane[idx] > plane[best]) best = idx;
            }
          }
          const std::size_t o = c * ho * wo + oy * wo + ox;
          dst[o] = plane[best];
          if (argmax) (*argmax)[b * s.channels * ho * wo + o] = static_cast<std::uint32_t>(c * h * w + best);
        }
      }
    }
  }
}

}  // namespace detail

template <typename T>
Network<T>::Network(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  param_index_.assign(arch_.layers.size(), -1);
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    const LayerSpec& s = arch_.layers[i];
    if (s.kind == LayerKind::Conv2d) {
      param_index_[i] = static_cast<int>(params_.size());
      const auto fan_in = static_cast<Eigen::Index>(s.channels * s.kernel * s.kernel);
      params_.push_back({s.name + ".weight", Matrix<T>::Zero(static_cast<Eigen::Index>(s.filters), fan_in),
                         Matrix<T>::Zero(static_cast<Eigen::Index>(s.filters), fan_in)});
      params_.push_back({s.name + ".bias", Matrix<T>::Zero(1, static_cast<Eigen::Index>(s.filters)),
                         Matrix<T>::Zero(1, static_cast<Eigen::Index>(s.filters))});
    } else if (s.kind == LayerKind::Dense) {
      param_index_[i] = static_cast<int>(params_.size());
      const auto out = static_cast<Eigen::Index>(s.out_features);
      const auto in = static_cast<Eigen::Index>(s.in_features);
      params_.push_back({s.name + ".weight", Matrix<T>::Zero(out, in), Matrix<T>::Zero(out, in)});
      params_.push_back({s.name + ".bias", Matrix<T>::Zero(1, out), Matrix<T>::Zero(1, out)});
    }
  }
  acts_.resize(arch_.layers.size() + 1);
  cols_.resize(arch_.layers.size());
  argmax_.resize(arch_.layers.size());
  masks_.resize(arch_.layers.size());
}

template <typename T>
template <typename URng>
void Network<T>::initialize(URng& rng, bool zero_output) {
  std::size_t last_dense = arch_.layers.size();
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    if (arch_.layers[i].kind == LayerKind::Dense) last_dense = i;
  }
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    if (param_index_[i] < 0) continue;
    auto& weight = params_[static_cast<std::size_t>(param_index_[i])].value;
    auto& bias = params_[static_cast<std::size_t>(param_index_[i]) + 1].value;
    bias.setZero();
    if (zero_output && i == last_dense) {
      weight.setZero();
      continue;
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(weight.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index r = 0; r < weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < weight.cols(); ++c) weight(r, c) = static_cast<T>(dist(rng));
    }
  }
}

template <typename T>
std::uint64_t Network<T>::next_random() {
  dropout_state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = dropout_state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename T>
void Network<T>::forward_layer(std::size_t i, const Matrix<T>& in, Matrix<T>& out,
                               Matrix<T>* cols, std::vector<std::uint32_t>* argmax,
                               const Matrix<T>* mask) const {
  const LayerSpec& s = arch_.layers[i];
  switch (s.kind) {
    case LayerKind::Conv2d: {
      const auto p = static_cast<std::size_t>(param_index_[i]);
      Matrix<T> scratch;
      detail::conv_forward(s, params_[p].value, params_[p + 1].value, in, out,
                           cols ? *cols : scratch);
      break;
    }
    case LayerKind::Dense: {
      const auto p = static_cast<std::size_t>(param_index_[i]);
      out.noalias() = in * params_[p].value.transpose();
      out.rowwise() += params_[p + 1].value.row(0);
      break;
    }
    case LayerKind::ReLU:
      out = in.cwiseMax(T(0));
      break;
    case LayerKind::MaxPool2:
      detail::pool_forward(s, in, out, argmax);
      break;
    case LayerKind::Dropout:
      if (mask && mask->size() != 0) {
        out = in.cwiseProduct(*mask);
      } else {
        out = in;
      }
      break;
  }
}

template <typename T>
void Network<T>::draw_dropout_mask(std::size_t i, Eigen::Index rows, Eigen::Index cols) {
  const LayerSpec& s = arch_.layers[i];
  Matrix<T>& mask = masks_[i];
  if (s.rate <= 0.0) {
    mask.resize(0, 0);
    return;
  }
  mask.resize(rows, cols);
  const T scale = T(1) / static_cast<T>(1.0 - s.rate);
  const auto threshold = static_cast<std::uint64_t>(
      s.rate * static_cast<double>(std::numeric_limits<std::uint64_t>::max()));
  T* m = mask.data();
  for (Eigen::Index k = 0; k < mask.size(); ++k) {
    m[k] = next_random() < threshold ? T(0) : scale;
  }
}

template <typename T>
Matrix<T> Network<T>::infer(const Matrix<T>& x, std::size_t begin, std::size_t end) const {
  end = std::min(end, arch_.layers.size());
  if (static_cast<std::size_t>(x.cols()) != arch_.width_at(begin)) {
    throw std::invalid_argument("network input width " + std::to_string(x.cols()) +
                                " != expected " + std::to_string(arch_.width_at(begin)));
  }
  Matrix<T> cur = x, next;
  for (std::size_t i = begin; i < end; ++i) {
    forward_layer(i, cur, next, nullptr, nullptr, nullptr);
    cur.swap(next);
  }
  return cur;
}

template <typename T>
const Matrix<T>& Network<T>::forward(const Matrix<T>& x, bool training, const MixHook<T>* mix) {
  if (static_cast<std::size_t>(x.cols()) != arch_.input_size) {
    throw std::invalid_argument("network input width " + std::to_string(x.cols()) +
                                " != expected " + std::to_string(arch_.input_size));
  }
  mix_.reset();
  if (mix) {
    if (mix->index > arch_.layers.size() ||
        mix->partner.size() != static_cast<std::size_t>(x.rows()) ||
        mix->lambda.size() != mix->partner.size()) {
      throw std::invalid_argument("mix hook does not match the batch");
    }
    mix_ = *mix;
  }
  auto apply_mix = [&](Matrix<T>& act) {
    const Matrix<T> src = act;
    for (Eigen::Index r = 0; r < act.rows(); ++r) {
      const T lam = mix_->lambda[static_cast<std::size_t>(r)];
      const auto j = static_cast<Eigen::Index>(mix_->partner[static_cast<std::size_t>(r)]);
      for (Eigen::Index c = 0; c < act.cols(); ++c) {
        act(r, c) = lam * src(r, c) + (T(1) - lam) * src(j, c);
      }
    }
  };
  acts_[0] = x;
  if (mix_ && mix_->index == 0) apply_mix(acts_[0]);
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    const bool dropout = arch_.layers[i].kind == LayerKind::Dropout;
    if (dropout) {
      if (training) {
        draw_dropout_mask(i, acts_[i].rows(), acts_[i].cols());
      } else {
        masks_[i].resize(0, 0);
      }
    }
    forward_layer(i, acts_[i], acts_[i + 1], &cols_[i], &argmax_[i],
                  dropout ? &masks_[i] : nullptr);
    if (mix_ && mix_->index == i + 1) apply_mix(acts_[i + 1]);
  }
  return acts_.back();
}

template <typename T>
Matrix<T> Network<T>::backward(const Matrix<T>& grad_output, bool want_input_grad) {
  Matrix<T> g = grad_output, gin;
  auto unmix = [&](Matrix<T>& grad) {
    Matrix<T> out = Matrix<T>::Zero(grad.rows(), grad.cols());
    for (Eigen::Index r = 0; r < grad.rows(); ++r) {
      const T lam = mix_->lambda[static_cast<std::size_t>(r)];
      const auto j = static_cast<Eigen::Index>(mix_->partner[static_cast<std::size_t>(r)]);
      out.row(r) += lam * grad.row(r);
      out.row(j) += (T(1) - lam) * grad.row(r);
    }
    grad.swap(out);
  };
  const std::size_t n = arch_.layers.size();
  for (std::size_t ii = n; ii-- > 0;) {
    if (mix_ && mix_->index == ii + 1) unmix(g);
    const LayerSpec& s = arch_.layers[ii];
    const bool need_in = ii > 0 || want_input_grad;
    const Matrix<T>& in = acts_[ii];
    switch (s.kind) {
      case LayerKind::Conv2d: {
        const auto p = static_cast<std::size_t>(param_index_[ii]);
        detail::conv_backward(s, params_[p].value, cols_[ii], g, params_[p].grad,
                              params_[p + 1].grad, need_in ? &gin : nullptr);
        break;
      }
      case LayerKind::Dense: {
        const auto p = static_cast<std::size_t>(param_index_[ii]);
        params_[p].grad.noalias() += g.transpose() * in;
        params_[p + 1].grad += g.colwise().sum();
        if (need_in) gin.noalias() = g * params_[p].value;
        break;
      }
      case LayerKind::ReLU:
        if (need_in) gin = (in.array() > T(0)).select(g, T(0));
        break;
      case LayerKind::MaxPool2: {
        if (!need_in) break;
        gin.setZero(in.rows(), in.cols());
        const std::size_t per = static_cast<std::size_t>(g.cols());
        for (Eigen::Index b = 0; b < g.rows(); ++b) {
          const T* src = g.row(b).data();
          T* dst = gin.row(b).data();
          const std::uint32_t* route = argmax_[ii].data() + static_cast<std::size_t>(b) * per;
          for (std::size_t o = 0; o < per; ++o) dst[route[o]] += src[o];
        }
        break;
      }
      case LayerKind::Dropout:
        if (need_in) gin = masks_[ii].size() == 0 ? g : Matrix<T>(g.cwiseProduct(masks_[ii]));
        break;
    }
    if (need_in) g.swap(gin);
  }
  if (!want_input_grad) return {};
  if (mix_ && mix_->index == 0) unmix(g);
  return g;
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

template <typename T>
T Network<T>::squared_norm() const {
  T s = 0;
  for (const auto& p : params_) s += p.value.squaredNorm();
  return s;
}

template <typename T>
template <typename U>
void Network<T>::copy_parameters_from(const Network<U>& other) {
  const auto& src = other.parameters();
  if (src.size() != params_.size()) throw std::invalid_argument("parameter list mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (src[i].value.rows() != params_[i].value.rows() ||
        src[i].value.cols() != params_[i].value.cols()) {
      throw std::invalid_argument("parameter shape mismatch for " + params_[i].name);
    }
    params_[i].value = src[i].value.template cast<T>();
  }
}

template <typename T>
Matrix<T> softmax(const Matrix<T>& logits) {
  Matrix<T> p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T m = logits.row(r).maxCoeff();
    T sum = 0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      p(r, c) = std::exp(logits(r, c) - m);
      sum += p(r, c);
    }
    p.row(r) /= sum;
  }
  return p;
}

template <typename T>
T softmax_cross_entropy(const Matrix<T>& logits, const Matrix<T>& targets, Matrix<T>& grad) {
  const Matrix<T> p = softmax(logits);
  const T n = static_cast<T>(logits.rows());
  T loss = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T m = logits.row(r).maxCoeff();
    T lse = 0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) lse += std::exp(logits(r, c) - m);
    lse = std::log(lse) + m;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      if (targets(r, c) != T(0)) loss -= targets(r, c) * (logits(r, c) - lse);
    }
  }
  // d/dz of -sum t log softmax(z) is softmax(z) * sum(t) - t.
  grad.resize(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T tsum = targets.row(r).sum();
    grad.row(r) = (p.row(r) * tsum - targets.row(r)) / n;
  }
  return loss / n;
}

template <typename T>
Matrix<T> sigmoid(const Matrix<T>& logits) {
  return logits.unaryExpr([](T z) { return T(1) / (T(1) + std::exp(-z)); });
}

template <typename T>
T sigmoid_mse(const Matrix<T>& logits, const Matrix<T>& targets, Matrix<T>& grad) {
  const Matrix<T> y = sigmoid(logits);
  const Matrix<T> diff = y - targets;
  const T n = static_cast<T>(diff.size());
  grad = (T(2) / n) * diff.cwiseProduct(y.cwiseProduct((T(1) - y.array()).matrix()));
  return diff.squaredNorm() / n;
}

template <typename T>
T sigmoid_bce(const Matrix<T>& logits, const Matrix<T>& targets, Matrix<T>& grad) {
  const T n = static_cast<T>(logits.rows());
  T loss = 0;
  grad.resize(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const T z = logits(r, c), t = targets(r, c);
      // log(1 + e^z) - t z, evaluated without overflow.
      loss += std::max(z, T(0)) - t * z + std::log1p(std::exp(-std::abs(z)));
      grad(r, c) = (T(1) / (T(1) + std::exp(-z)) - t) / n;
    }
  }
  return loss / n;
}

}  // namespace pseudorep::nn
