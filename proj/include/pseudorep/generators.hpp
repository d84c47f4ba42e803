#pragma once

#include <cstdint>

#include "pseudorep/dataset.hpp"

namespace pseudorep {

/// Three-class crack images: 0 = crack in the left half, 1 = right half,
/// 2 = both halves. A crack is a bright, mostly vertical polyline on a dark
/// noisy background. Rows are class-major; ids are 0..n-1.
Dataset gen_crack_dataset(std::size_t n_per_class, std::size_t size,
                          std::uint64_t seed);

/// Wafer-map-like defect patterns on a disk (outside 0, die 0.5, defect 1):
///   0 edge ring, 1 center blob, 2 scratch line, 3 random dots,
///   4 donut, 5 edge-local arc, 6 local cluster.
/// `difficulty` in (0, 1] scales background defect density, pattern pixel
/// dropout and geometric jitter. At most 7 classes.
Dataset gen_synthetic_classes(int num_classes, std::size_t n_per_class,
                              std::size_t size, double difficulty,
                              std::uint64_t seed);

/// Heartbeat-like 1-D signals in [0, 1]: each class is a fixed mixture of
/// Gaussian bumps; samples add amplitude/phase jitter and noise scaled by
/// `difficulty`. At most 5 classes.
Dataset gen_synthetic_signals(int num_classes, std::size_t n_per_class,
                              std::size_t length, double difficulty,
                              std::uint64_t seed);

}  // namespace pseudorep
