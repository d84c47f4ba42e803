#include "pseudorep/augment.hpp"

#include <algorithm>

#include "pseudorep/errors.hpp"
#include "pseudorep/random.hpp"

namespace pseudorep {

std::string to_string(AugmentOp op) {
  switch (op) {
    case AugmentOp::HFlip: return "hflip";
    case AugmentOp::VFlip: return "vflip";
    case AugmentOp::Rot90: return "rot90";
    case AugmentOp::Rot180: return "rot180";
    case AugmentOp::Rot270: return "rot270";
  }
  return "?";
}

AugmentOp parse_augment_op(const std::string& name) {
  for (auto op : {AugmentOp::HFlip, AugmentOp::VFlip, AugmentOp::Rot90,
                  AugmentOp::Rot180, AugmentOp::Rot270}) {
    if (to_string(op) == name) return op;
  }
  throw ConfigError("unknown augmentation op '" + name + "'");
}

std::vector<float> apply_op(AugmentOp op, const Shape& shape,
                            std::span<const float> sample) {
  if (sample.size() != shape.numel()) throw InputError("apply_op: sample size mismatch");
  if (!shape.is_image()) {
    if (op != AugmentOp::HFlip) {
      throw ConfigError("1-D samples only support hflip, got " + to_string(op));
    }
    return std::vector<float>(sample.rbegin(), sample.rend());
  }
  const std::size_t c = shape.dims[0], h = shape.dims[1], w = shape.dims[2];
  const bool rotates_quarter = op == AugmentOp::Rot90 || op == AugmentOp::Rot270;
  if (rotates_quarter && h != w) {
    throw ConfigError("quarter rotations need square images");
  }
  std::vector<float> out(sample.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float* src = sample.data() + ch * h * w;
    float* dst = out.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        std::size_t sy = y, sx = x;
        switch (op) {
          case AugmentOp::HFlip: sx = w - 1 - x; break;
          case AugmentOp::VFlip: sy = h - 1 - y; break;
          case AugmentOp::Rot180: sy = h - 1 - y; sx = w - 1 - x; break;
          // dst(y, x) = src(x, w-1-y) rotates counter-clockwise.
          case AugmentOp::Rot90: sy = x; sx = w - 1 - y; break;
          case AugmentOp::Rot270: sy = h - 1 - x; sx = y; break;
        }
        dst[y * w + x] = src[sy * w + sx];
      }
    }
  }
  return out;
}

SampleId augmented_id(SampleId parent, std::size_t copy_index) {
  const std::uint64_t h = splitmix64(parent.value ^ splitmix64(copy_index + 1));
  return SampleId{h | (1ULL << 63)};
}

Dataset augment(const Dataset& dataset, const AugmentationSpec& spec) {
  if (spec.k > 0 && spec.ops.empty()) {
    throw ConfigError("augmentation with k > 0 needs at least one op");
  }
  if (!dataset.shape().is_image()) {
    for (auto op : spec.ops) {
      if (op != AugmentOp::HFlip) {
        throw ConfigError("1-D samples only support hflip, got " + to_string(op));
      }
    }
  }
  const std::size_t n = dataset.size();
  const std::size_t d = dataset.sample_size();
  const std::size_t total = n * spec.k + (spec.include_original ? n : 0);
  std::vector<float> samples;
  samples.reserve(total * d);
  std::vector<SampleId> ids, parents;
  ids.reserve(total);
  parents.reserve(total);
  std::optional<std::vector<int>> labels;
  if (dataset.has_labels()) labels.emplace();

  if (spec.include_original) {
    samples.assign(dataset.samples().begin(), dataset.samples().end());
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(dataset.id(i));
      parents.push_back(dataset.parent(i));
      if (labels) labels->push_back(dataset.label(i));
    }
  }
  Rng rng(derive_seed(spec.seed, "augment"));
  std::uniform_int_distribution<std::size_t> pick(0, spec.ops.empty() ? 0 : spec.ops.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < spec.k; ++c) {
      const AugmentOp op = spec.ops[pick(rng)];
      auto copy = apply_op(op, dataset.shape(), dataset.sample(i));
      samples.insert(samples.end(), copy.begin(), copy.end());
      ids.push_back(augmented_id(dataset.id(i), c));
      parents.push_back(dataset.parent(i));
      if (labels) labels->push_back(dataset.label(i));
    }
  }
  return Dataset(dataset.shape(), std::move(samples), std::move(ids),
                 std::move(labels), dataset.num_classes(), std::move(parents));
}

}  // namespace pseudorep
