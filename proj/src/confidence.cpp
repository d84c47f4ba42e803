#include <cmath>

#include "pseudorep/errors.hpp"
#include "pseudorep/models.hpp"

namespace pseudorep {

std::string to_string(ConfidenceMetric m) {
  return m == ConfidenceMetric::MaxProb ? "max_prob" : "neg_entropy";
}

ConfidenceMetric parse_confidence_metric(const std::string& name) {
  if (name == "max_prob") return ConfidenceMetric::MaxProb;
  if (name == "neg_entropy") return ConfidenceMetric::NegEntropy;
  throw ConfigError("unknown confidence metric '" + name + "'");
}

std::vector<double> score_confidence(const FloatMatrix& proba, ConfidenceMetric metric) {
  std::vector<double> out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index r = 0; r < proba.rows(); ++r) {
    double sum = 0.0, best = 0.0, ent = 0.0;
    for (Eigen::Index c = 0; c < proba.cols(); ++c) {
      const double p = proba(r, c);
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw InputError("score_confidence: row " + std::to_string(r) + " has an invalid entry");
      }
      sum += p;
      best = std::max(best, p);
      if (p > 0.0) ent += p * std::log(p);
    }
    if (std::abs(sum - 1.0) > 1e-4) {
      throw InputError("score_confidence: row " + std::to_string(r) + " sums to " +
                       std::to_string(sum));
    }
    out[static_cast<std::size_t>(r)] = metric == ConfidenceMetric::MaxProb ? best : ent;
  }
  return out;
}

}  // namespace pseudorep
