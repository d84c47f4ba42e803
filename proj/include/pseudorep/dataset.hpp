#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pseudorep {

/// Opaque, stable identifier of a sample. Generated and loaded datasets use
/// small integers; augmented copies use hashed ids with the top bit set.
struct SampleId {
  std::uint64_t value = 0;
  friend auto operator<=>(const SampleId&, const SampleId&) = default;
};

struct SampleIdHash {
  std::size_t operator()(SampleId id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};

/// Per-sample dimensions, excluding the sample axis. Images are {C, H, W},
/// 1-D signals are {D}.
struct Shape {
  std::vector<std::size_t> dims;

  std::size_t rank() const { return dims.size(); }
  std::size_t numel() const;
  bool is_image() const { return dims.size() == 3; }
  std::size_t channels() const { return is_image() ? dims[0] : 1; }
  std::size_t height() const { return is_image() ? dims[1] : 1; }
  std::size_t width() const { return is_image() ? dims[2] : dims.at(0); }
  std::string to_string() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Immutable collection of samples with optional labels.
///
/// Samples are stored row-major as one contiguous float buffer of
/// size() * shape().numel() values. Construction validates the invariants:
/// unique ids, labels in [0, num_classes), finite values, and image values
/// in [0, 1].
class Dataset {
 public:
  Dataset() = default;
  Dataset(Shape shape, std::vector<float> samples, std::vector<SampleId> ids,
          std::optional<std::vector<int>> labels, int num_classes,
          std::vector<SampleId> parents = {});

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const Shape& shape() const { return shape_; }
  std::size_t sample_size() const { return shape_.numel(); }
  int num_classes() const { return num_classes_; }

  std::span<const float> samples() const { return samples_; }
  std::span<const float> sample(std::size_t i) const {
    return std::span<const float>(samples_).subspan(i * sample_size(),
                                                    sample_size());
  }

  const std::vector<SampleId>& ids() const { return ids_; }
  SampleId id(std::size_t i) const { return ids_[i]; }
  /// The sample this one was derived from; its own id for originals.
  SampleId parent(std::size_t i) const {
    return parents_.empty() ? ids_[i] : parents_[i];
  }
  bool has_parents() const { return !parents_.empty(); }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  int label(std::size_t i) const { return labels().at(i); }

  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset without_labels() const;
  Dataset with_labels(std::vector<int> labels) const;
  Dataset with_num_classes(int num_classes) const;

  /// Rows in order a then b. Both must agree on shape and labeled-ness.
  static Dataset concat(const Dataset& a, const Dataset& b);

  /// Per-class sample counts; requires labels.
  std::vector<std::size_t> class_counts() const;

  /// SHA-256 over shape, ids, labels and payload, as lowercase hex.
  std::string content_hash() const;

 private:
  Shape shape_;
  std::vector<float> samples_;
  std::vector<SampleId> ids_;
  std::vector<SampleId> parents_;
  std::optional<std::vector<int>> labels_;
  int num_classes_ = 1;
};

/// Ground-truth labels of the unlabeled pool. Only evaluation code receives
/// this; nothing on the training path takes it as an argument.
class HiddenTruth {
 public:
  HiddenTruth() = default;
  explicit HiddenTruth(const Dataset& labeled_source);

  std::optional<int> lookup(SampleId id) const;
  std::size_t size() const { return truth_.size(); }

 private:
  std::unordered_map<SampleId, int, SampleIdHash> truth_;
};

}  // namespace pseudorep
