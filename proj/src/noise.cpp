#include "pseudorep/noise.hpp"

#include "pseudorep/errors.hpp"
#include "pseudorep/random.hpp"

namespace pseudorep {

std::vector<int> inject_label_noise(std::span<const int> labels, int num_classes,
                                    const NoiseSpec& spec) {
  if (num_classes < 2) throw ConfigError("label noise needs at least 2 classes");
  if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) {
    throw ConfigError("noise rate must be in [0, 1]");
  }
  Rng rng(derive_seed(spec.seed, "label-noise"));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> other(0, num_classes - 2);
  std::vector<int> out(labels.begin(), labels.end());
  for (auto& y : out) {
    if (y < 0 || y >= num_classes) throw InputError("label outside [0, num_classes)");
    // Both draws happen for every label so the stream does not depend on rate.
    const double u = coin(rng);
    const int r = other(rng);
    if (u < spec.rate) y = r >= y ? r + 1 : r;
  }
  return out;
}

}  // namespace pseudorep
