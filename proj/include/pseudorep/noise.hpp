#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pseudorep {

struct NoiseSpec {
  double rate = 0.0;
  std::uint64_t seed = 0;
};

/// Each label is replaced with probability `rate` by a uniform draw over the
/// other num_classes - 1 classes.
std::vector<int> inject_label_noise(std::span<const int> labels, int num_classes,
                                    const NoiseSpec& spec);

}  // namespace pseudorep
