#pragma once

// Minimal feed-forward network core: 3x3 convolutions, 2x2 max pooling,
// dense layers, ReLU and inverted dropout over row-major activation
// matrices (one sample per row, channel-major planes).
//
// Network<T> is instantiated for float (training and inference) and double
// (finite-difference gradient checks).

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace pseudorep::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class LayerKind { Conv2d, ReLU, MaxPool2, Dense, Dropout };

std::string to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::string name;
  // Conv2d / MaxPool2: input planes.
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t filters = 0;
  std::size_t kernel = 3;
  // Dense.
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  // Dropout.
  double rate = 0.0;

  std::size_t input_size() const;
  std::size_t output_size() const;
  bool has_parameters() const {
    return kind == LayerKind::Conv2d || kind == LayerKind::Dense;
  }
};

struct Tap {
  std::string name;
  std::size_t index = 0;  // activation entering layer `index`
};

struct Architecture {
  std::string id;
  std::size_t input_size = 0;
  std::vector<LayerSpec> layers;
  std::vector<Tap> taps;

  std::size_t output_size() const;
  /// Width of the activation entering layer `index`.
  std::size_t width_at(std::size_t index) const;
  std::optional<std::size_t> tap_index(std::string_view name) const;
  std::vector<std::string> tap_names() const;
  /// Throws if a layer's input width disagrees with the previous output.
  void validate() const;
};

nlohmann::ordered_json to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::ordered_json& j);

template <typename T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
};

/// Per-sample convex mixing applied to the activation entering layer
/// `index`: row i becomes lambda[i] * row i + (1 - lambda[i]) * row partner[i].
template <typename T>
struct MixHook {
  std::size_t index = 0;
  std::vector<std::size_t> partner;
  std::vector<T> lambda;
};

template <typename T>
class Network {
 public:
  Network() = default;
  explicit Network(Architecture arch);

  const Architecture& architecture() const { return arch_; }

  /// He-uniform weights, zero biases. `zero_output` zeroes the last dense
  /// layer so the untrained network is output-symmetric.
  template <typename URng>
  void initialize(URng& rng, bool zero_output = false);

  /// Stateless inference over layers [begin, end).
  Matrix<T> infer(const Matrix<T>& x, std::size_t begin = 0,
                  std::size_t end = static_cast<std::size_t>(-1)) const;

  /// Training forward; keeps the activations needed by backward().
  const Matrix<T>& forward(const Matrix<T>& x, bool training,
                           const MixHook<T>* mix = nullptr);

  /// Accumulates parameter gradients for d(loss)/d(output) = grad_output.
  /// Returns d(loss)/d(input) when requested, an empty matrix otherwise.
  Matrix<T> backward(const Matrix<T>& grad_output, bool want_input_grad = false);

  /// Activation entering layer `index` during the last forward() (after
  /// mixing, when a hook targeted that index).
  const Matrix<T>& activation(std::size_t index) const { return acts_.at(index); }

  void zero_grad();
  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  T squared_norm() const;

  void seed_dropout(std::uint64_t seed) { dropout_state_ = seed; }

  /// Copies parameter values from a network of any scalar type with the
  /// same architecture.
  template <typename U>
  void copy_parameters_from(const Network<U>& other);

 private:
  void forward_layer(std::size_t i, const Matrix<T>& in, Matrix<T>& out,
                     Matrix<T>* cols, std::vector<std::uint32_t>* argmax,
                     const Matrix<T>* mask) const;
  void draw_dropout_mask(std::size_t i, Eigen::Index rows, Eigen::Index cols);
  std::uint64_t next_random();

  Architecture arch_;
  std::vector<Parameter<T>> params_;
  std::vector<int> param_index_;  // layer -> first parameter (weight), or -1
  std::vector<Matrix<T>> acts_;
  std::vector<Matrix<T>> cols_;                // conv im2col cache
  std::vector<std::vector<std::uint32_t>> argmax_;  // pool routing
  std::vector<Matrix<T>> masks_;               // dropout masks
  std::optional<MixHook<T>> mix_;
  std::uint64_t dropout_state_ = 0x853c49e6748fea9bULL;
};

// Loss helpers. All return the batch-mean loss and fill `grad` with
// d(loss)/d(input) of the same shape.

/// Row-wise stable softmax.
template <typename T>
Matrix<T> softmax(const Matrix<T>& logits);

/// Cross-entropy of softmax(logits) against (possibly soft) target rows.
template <typename T>
T softmax_cross_entropy(const Matrix<T>& logits, const Matrix<T>& targets,
                        Matrix<T>& grad);

template <typename T>
Matrix<T> sigmoid(const Matrix<T>& logits);

/// Mean over all elements of (sigmoid(logits) - targets)^2.
template <typename T>
T sigmoid_mse(const Matrix<T>& logits, const Matrix<T>& targets, Matrix<T>& grad);

/// Binary cross-entropy of sigmoid(logits), summed per row, mean over rows.
template <typename T>
T sigmoid_bce(const Matrix<T>& logits, const Matrix<T>& targets, Matrix<T>& grad);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace pseudorep::nn

#include "pseudorep/nn_impl.hpp"
