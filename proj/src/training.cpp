#include "training_internal.hpp"

#include <cmath>
#include <set>

#include "pseudorep/errors.hpp"

namespace pseudorep {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be non-negative");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
}

TrainingConfig TrainingConfig::high_lr_preset() {
  TrainingConfig c;
  c.learning_rate = 0.1;
  return c;
}

Json to_json(const TrainingConfig& c) {
  return Json{{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
              {"dropout", c.dropout},             {"batch_size", c.batch_size},
              {"epochs", c.epochs},               {"optimizer", "adam"},
              {"seed", c.seed}};
}

TrainingConfig training_config_from_json(const Json& j, const TrainingConfig& base) {
  TrainingConfig c = base;
  if (!j.is_object()) throw ConfigError("training config must be an object");
  static const std::set<std::string> known{"preset",     "learning_rate", "weight_decay", "dropout",
                                           "batch_size", "epochs",        "optimizer",    "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key + ": unknown field");
  }
  if (j.contains("preset")) {
    const auto p = j.at("preset").get<std::string>();
    if (p == "high_lr") {
      c.learning_rate = TrainingConfig::high_lr_preset().learning_rate;
    } else if (p != "default") {
      throw ConfigError("unknown training preset '" + p + "'");
    }
  }
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.dropout = j.value("dropout", c.dropout);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  if (j.contains("optimizer") && j.at("optimizer").get<std::string>() != "adam") {
    throw ConfigError("only the adam optimizer is supported");
  }
  c.validate();
  return c;
}

namespace detail {

Adam::Adam(const std::vector<nn::Parameter<float>>& params, double learning_rate)
    : lr_(learning_rate) {
  for (const auto& p : params) {
    m_.push_back(FloatMatrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(FloatMatrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void Adam::step(std::vector<nn::Parameter<float>>& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const float step = static_cast<float>(lr_ / c1);
  const float inv_c2 = static_cast<float>(1.0 / c2);
  const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
  const float eps = static_cast<float>(eps_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = params[i].grad.array();
    auto m = m_[i].array();
    auto v = v_[i].array();
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g.square();
    params[i].value.array() -= step * m / ((v * inv_c2).sqrt() + eps);
  }
}

std::vector<std::size_t> batch_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

FloatMatrix gather_rows(const FloatMatrix& m, std::span<const std::size_t> rows) {
  FloatMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

}  // namespace detail
}  // namespace pseudorep
