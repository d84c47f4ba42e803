#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pseudorep/dataset.hpp"

namespace pseudorep {

enum class AugmentOp { HFlip, VFlip, Rot90, Rot180, Rot270 };

std::string to_string(AugmentOp op);
AugmentOp parse_augment_op(const std::string& name);

struct AugmentationSpec {
  std::vector<AugmentOp> ops{AugmentOp::HFlip, AugmentOp::VFlip, AugmentOp::Rot90,
                             AugmentOp::Rot180, AugmentOp::Rot270};
  std::size_t k = 0;
  bool include_original = true;
  std::uint64_t seed = 0;
};

/// Applies one geometric op to a single sample. Rotations are
/// counter-clockwise and need square planes. 1-D samples accept HFlip only
/// (time reversal).
std::vector<float> apply_op(AugmentOp op, const Shape& shape,
                            std::span<const float> sample);

/// Returns the originals (when include_original) followed by k copies of
/// every sample. Each copy uses one op drawn uniformly from spec.ops, gets a
/// fresh id, records its source as parent and inherits the label.
Dataset augment(const Dataset& dataset, const AugmentationSpec& spec);

/// Id given to copy `copy_index` of `parent`; top bit set.
SampleId augmented_id(SampleId parent, std::size_t copy_index);

}  // namespace pseudorep
