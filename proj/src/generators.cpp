#include "pseudorep/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pseudorep/errors.hpp"
#include "pseudorep/random.hpp"

namespace pseudorep {
namespace {

struct Canvas {
  std::size_t size;
  std::vector<float> px;
  explicit Canvas(std::size_t s, float fill = 0.0f) : size(s), px(s * s, fill) {}
  float& at(long y, long x) { return px[static_cast<std::size_t>(y) * size + static_cast<std::size_t>(x)]; }
  bool inside(long y, long x) const {
    return y >= 0 && x >= 0 && y < static_cast<long>(size) && x < static_cast<long>(size);
  }
  void raise(long y, long x, float v) {
    if (inside(y, x)) at(y, x) = std::max(at(y, x), v);
  }
};

/// Mostly vertical random-walk crack confined to columns [x_lo, x_hi].
void draw_crack(Canvas& c, long x_lo, long x_hi, Rng& rng) {
  const long s = static_cast<long>(c.size);
  std::uniform_int_distribution<long> start_x(x_lo + 1, std::max(x_lo + 1, x_hi - 1));
  std::uniform_int_distribution<long> start_y(0, s / 4);
  std::uniform_int_distribution<long> stop_y(3 * s / 4, s - 1);
  std::uniform_int_distribution<int> step(-1, 1);
  std::uniform_real_distribution<float> bright(0.8f, 1.0f);
  long x = start_x(rng);
  const long y1 = stop_y(rng);
  for (long y = start_y(rng); y <= y1; ++y) {
    x = std::clamp(x + step(rng), x_lo, x_hi);
    const float v = bright(rng);
    c.raise(y, x, v);
    const long side = x + (step(rng) >= 0 ? 1 : -1);
    if (side >= x_lo && side <= x_hi) c.raise(y, side, 0.5f * v);
  }
}

void append(std::vector<float>& samples, const Canvas& c) {
  samples.insert(samples.end(), c.px.begin(), c.px.end());
}

Dataset finish(std::size_t size, std::vector<float> samples,
               std::vector<int> labels, int num_classes) {
  std::vector<SampleId> ids(labels.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = SampleId{i};
  return Dataset(Shape{{1, size, size}}, std::move(samples), std::move(ids),
                 std::move(labels), num_classes);
}

}  // namespace

Dataset gen_crack_dataset(std::size_t n_per_class, std::size_t size,
                          std::uint64_t seed) {
  if (size < 8) throw ConfigError("crack images need size >= 8");
  if (n_per_class == 0) throw ConfigError("n_per_class must be positive");
  Rng rng(derive_seed(seed, "crack"));
  std::uniform_real_distribution<float> background(0.0f, 0.1f);
  const long s = static_cast<long>(size);
  const long mid = s / 2;
  std::vector<float> samples;
  samples.reserve(3 * n_per_class * size * size);
  std::vector<int> labels;
  for (int cls = 0; cls < 3; ++cls) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      Canvas c(size);
      for (auto& p : c.px) p = background(rng);
      if (cls == 0 || cls == 2) draw_crack(c, 0, mid - 1, rng);
      if (cls == 1 || cls == 2) draw_crack(c, mid, s - 1, rng);
      append(samples, c);
      labels.push_back(cls);
    }
  }
  return finish(size, std::move(samples), std::move(labels), 3);
}

Dataset gen_synthetic_classes(int num_classes, std::size_t n_per_class,
                              std::size_t size, double difficulty,
                              std::uint64_t seed) {
  if (num_classes < 1 || num_classes > 7) throw ConfigError("num_classes must be in [1, 7]");
  if (n_per_class == 0) throw ConfigError("n_per_class must be positive");
  if (size < 8) throw ConfigError("defect maps need size >= 8");
  if (!(difficulty > 0.0 && difficulty <= 1.0)) throw ConfigError("difficulty must be in (0, 1]");

  Rng rng(derive_seed(seed, "synthetic-classes"));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double s = static_cast<double>(size);
  const double centre = (s - 1.0) / 2.0;
  const double radius = s / 2.0 - 0.5;
  const double noise_p = 0.02 + 0.18 * difficulty;
  const double keep_p = 1.0 - 0.45 * difficulty;
  const double jitter = 0.5 * difficulty;
  constexpr double pi = std::numbers::pi;

  std::vector<float> samples;
  samples.reserve(static_cast<std::size_t>(num_classes) * n_per_class * size * size);
  std::vector<int> labels;

  for (int cls = 0; cls < num_classes; ++cls) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      // Per-sample pattern parameters.
      const double j1 = (u01(rng) - 0.5) * jitter, j2 = (u01(rng) - 0.5) * jitter;
      const double angle = u01(rng) * 2.0 * pi;
      const double cx = centre + j1 * radius, cy = centre + j2 * radius;
      const double blob_r = radius * (0.3 + 0.25 * (u01(rng) - 0.5) * jitter * 2.0);
      const double loc_r = radius * (0.45 + 0.2 * u01(rng));
      const double loc_x = centre + loc_r * std::cos(angle);
      const double loc_y = centre + loc_r * std::sin(angle);
      const double loc_size = radius * (0.22 + 0.1 * u01(rng) * jitter);
      const double scratch_len = radius * (1.0 + 0.6 * u01(rng));
      const double scratch_off = (u01(rng) - 0.5) * radius;
      const double donut_in = radius * (0.4 + 0.1 * j1), donut_out = radius * (0.65 + 0.1 * j2);
      const double ring_w = radius * (0.18 + 0.08 * u01(rng));
      const double arc_half = pi * (0.2 + 0.1 * u01(rng));

      Canvas c(size);
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
          const double dy = static_cast<double>(y) - centre;
          const double dx = static_cast<double>(x) - centre;
          const double r = std::hypot(dx, dy);
          if (r > radius) continue;
          bool defect = false;
          switch (cls) {
            case 0:
              defect = r >= radius - ring_w;
              break;
            case 1:
              defect = std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy) <= blob_r;
              break;
            case 2: {
              // Distance from the line through the wafer at `angle`, offset
              // from the centre, limited to scratch_len along its direction.
              const double ux = std::cos(angle), uy = std::sin(angle);
              const double along = dx * ux + dy * uy;
              const double across = -dx * uy + dy * ux - scratch_off;
              defect = std::abs(across) <= 0.75 && std::abs(along) <= scratch_len / 2.0;
              break;
            }
            case 3:
              defect = u01(rng) < 0.3;
              break;
            case 4:
              defect = r >= donut_in && r <= donut_out;
              break;
            case 5: {
              double d = std::atan2(dy, dx) - angle;
              d = std::remainder(d, 2.0 * pi);
              defect = r >= radius - ring_w && std::abs(d) <= arc_half;
              break;
            }
            case 6:
              defect = std::hypot(static_cast<double>(x) - loc_x, static_cast<double>(y) - loc_y) <= loc_size;
              break;
          }
          if (defect && u01(rng) > keep_p) defect = false;
          if (!defect && u01(rng) < noise_p) defect = true;
          c.at(static_cast<long>(y), static_cast<long>(x)) = defect ? 1.0f : 0.5f;
        }
      }
      append(samples, c);
      labels.push_back(cls);
    }
  }
  return finish(size, std::move(samples), std::move(labels), num_classes);
}

Dataset gen_synthetic_signals(int num_classes, std::size_t n_per_class,
                              std::size_t length, double difficulty,
                              std::uint64_t seed) {
  if (num_classes < 1 || num_classes > 5) throw ConfigError("num_classes must be in [1, 5]");
  if (n_per_class == 0) throw ConfigError("n_per_class must be positive");
  if (length < 8) throw ConfigError("signals need length >= 8");
  if (!(difficulty > 0.0 && difficulty <= 1.0)) throw ConfigError("difficulty must be in (0, 1]");

  struct Bump { double pos, width, amp; };
  // Normal beat, wide QRS, early beat, inverted T, fusion-like double peak.
  const std::vector<std::vector<Bump>> templates = {
      {{0.20, 0.03, 0.25}, {0.35, 0.015, 1.0}, {0.60, 0.06, 0.35}},
      {{0.20, 0.03, 0.2}, {0.36, 0.05, 0.9}, {0.65, 0.07, 0.3}},
      {{0.10, 0.03, 0.2}, {0.22, 0.015, 1.0}, {0.45, 0.06, 0.35}},
      {{0.20, 0.03, 0.25}, {0.35, 0.015, 1.0}, {0.60, 0.06, -0.35}},
      {{0.30, 0.02, 0.8}, {0.42, 0.02, 0.8}, {0.70, 0.06, 0.3}},
  };
  Rng rng(derive_seed(seed, "synthetic-signals"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<float> samples;
  std::vector<int> labels;
  for (int cls = 0; cls < num_classes; ++cls) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const double shift = 0.03 * difficulty * gauss(rng);
      const double scale = 1.0 + 0.2 * difficulty * gauss(rng);
      for (std::size_t t = 0; t < length; ++t) {
        const double tt = static_cast<double>(t) / static_cast<double>(length - 1);
        double v = 0.3;
        for (const auto& b : templates[static_cast<std::size_t>(cls)]) {
          const double z = (tt - b.pos - shift) / b.width;
          v += 0.5 * scale * b.amp * std::exp(-0.5 * z * z);
        }
        v += 0.05 * difficulty * gauss(rng);
        samples.push_back(static_cast<float>(std::clamp(v, 0.0, 1.0)));
      }
      labels.push_back(cls);
    }
  }
  std::vector<SampleId> ids(labels.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = SampleId{i};
  return Dataset(Shape{{length}}, std::move(samples), std::move(ids),
                 std::move(labels), num_classes);
}

}  // namespace pseudorep
