#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "pseudorep/errors.hpp"
#include "pseudorep/pool.hpp"

namespace pseudorep {

std::size_t SelectionRecord::size() const {
  std::size_t n = 0;
  for (const auto& c : per_class) n += c.size();
  return n;
}

std::vector<SelectedSample> SelectionRecord::flattened() const {
  std::vector<SelectedSample> out;
  out.reserve(size());
  for (const auto& c : per_class) out.insert(out.end(), c.begin(), c.end());
  return out;
}

std::size_t selection_quota(double alpha, std::size_t n_per_class) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
  const double q = std::floor(alpha * static_cast<double>(n_per_class));
  if (q < 1.0) {
    throw ConfigError("floor(alpha * n_per_class) = 0 for alpha=" + std::to_string(alpha) +
                      ", n_per_class=" + std::to_string(n_per_class));
  }
  return static_cast<std::size_t>(q);
}

SelectionRecord select_per_class(const FloatMatrix& proba, std::span<const SampleId> ids,
                                 double alpha, std::size_t n_per_class, ConfidenceMetric metric) {
  const std::size_t q = selection_quota(alpha, n_per_class);
  if (static_cast<std::size_t>(proba.rows()) != ids.size()) {
    throw InputError("select_per_class: id count does not match probability rows");
  }
  {
    std::unordered_set<SampleId, SampleIdHash> seen(ids.begin(), ids.end());
    if (seen.size() != ids.size()) throw InputError("select_per_class: duplicate ids");
  }
  const auto k = static_cast<std::size_t>(proba.cols());
  const auto score = score_confidence(proba, metric);
  const auto pred = argmax_rows(proba);

  std::vector<std::vector<SelectedSample>> buckets(k);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    buckets[static_cast<std::size_t>(pred[i])].push_back({ids[i], pred[i], score[i]});
  }
  SelectionRecord rec;
  rec.quota = q;
  rec.per_class.resize(k);
  rec.shortfall.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    auto& b = buckets[c];
    const std::size_t take = std::min(q, b.size());
    std::partial_sort(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(take), b.end(),
                      [](const SelectedSample& x, const SelectedSample& y) {
                        if (x.confidence != y.confidence) return x.confidence > y.confidence;
                        return x.id < y.id;
                      });
    rec.per_class[c].assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(take));
    rec.shortfall[c] = q - take;
  }
  return rec;
}

}  // namespace pseudorep
