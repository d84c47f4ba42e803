#include "pseudorep/history.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "pseudorep/errors.hpp"

namespace pseudorep {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& path) {
  if (!j.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(path + key + ": unknown field");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + key + ": wrong type");
  }
}

template <typename F>
auto nested(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + e.what());
  }
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

Json to_json(const AugmentationSpec& a) {
  Json ops = Json::array();
  for (auto op : a.ops) ops.push_back(to_string(op));
  return Json{{"ops", ops}, {"k", a.k}, {"include_original", a.include_original}, {"seed", a.seed}};
}

AugmentationSpec augmentation_from_json(const Json& j, const AugmentationSpec& base) {
  reject_unknown(j, {"ops", "k", "include_original", "seed"}, "");
  AugmentationSpec a = base;
  if (j.contains("ops")) {
    std::vector<std::string> names;
    read(j, "ops", names, "");
    a.ops.clear();
    for (const auto& n : names) a.ops.push_back(parse_augment_op(n));
  }
  read(j, "k", a.k, "");
  read(j, "include_original", a.include_original, "");
  read(j, "seed", a.seed, "");
  if (a.k > 0 && a.ops.empty()) throw ConfigError("ops: must be non-empty when k > 0");
  return a;
}

Json to_json(const MixupSpec& m) {
  return Json{{"mode", to_string(m.mode)},
              {"layer", m.layer},
              {"beta_a", m.beta_a},
              {"seed", m.seed},
              {"allow_autoencoder_latent", m.allow_autoencoder_latent}};
}

MixupSpec mixup_from_json(const Json& j, const MixupSpec& base) {
  reject_unknown(j, {"mode", "layer", "beta_a", "seed", "allow_autoencoder_latent"}, "");
  MixupSpec m = base;
  if (j.contains("mode")) {
    std::string mode;
    read(j, "mode", mode, "");
    m.mode = parse_mixup_mode(mode);
    if (m.mode != MixupMode::Feature) m.layer.clear();
  }
  read(j, "layer", m.layer, "");
  read(j, "beta_a", m.beta_a, "");
  read(j, "seed", m.seed, "");
  read(j, "allow_autoencoder_latent", m.allow_autoencoder_latent, "");
  m.validate();
  return m;
}

Json to_json(const LoopConfig& c) {
  return Json{
      {"alpha", c.alpha},
      {"n_per_class", c.n_per_class ? Json(*c.n_per_class) : Json(nullptr)},
      {"augmentation", to_json(c.augmentation)},
      {"reaugment_pseudo", c.reaugment_pseudo},
      {"max_iterations", c.max_iterations},
      {"confidence", to_string(c.metric)},
      {"early_stop", {{"enabled", c.early_stop.enabled}, {"patience", c.early_stop.patience}}},
      {"validation_fraction", c.validation_fraction},
      {"m_l", to_json(c.m_l)},
      {"m_u", to_json(c.m_u)},
      {"m_w", to_json(c.m_w)},
      {"use_representation", c.use_representation},
      {"representation", to_string(c.representation)},
      {"latent_dim", c.latent_dim},
      {"embedding_layer", c.embedding_layer},
      {"mixup", to_json(c.mixup)},
      {"seed", c.seed},
  };
}

LoopConfig loop_config_from_json(const Json& j, const LoopConfig& base) {
  reject_unknown(j,
                 {"alpha", "n_per_class", "augmentation", "reaugment_pseudo", "max_iterations",
                  "confidence", "early_stop", "validation_fraction", "m_l", "m_u", "m_w",
                  "use_representation", "representation", "latent_dim", "embedding_layer",
                  "mixup", "seed"},
                 "");
  if (!j.contains("alpha")) throw ConfigError("alpha: missing required field");
  LoopConfig c = base;
  read(j, "alpha", c.alpha, "");
  if (j.contains("n_per_class")) {
    if (j.at("n_per_class").is_null()) {
      c.n_per_class.reset();
    } else {
      std::size_t n = 0;
      read(j, "n_per_class", n, "");
      c.n_per_class = n;
    }
  }
  if (j.contains("augmentation")) {
    c.augmentation = nested("augmentation.", [&] {
      return augmentation_from_json(j.at("augmentation"), c.augmentation);
    });
  }
  read(j, "reaugment_pseudo", c.reaugment_pseudo, "");
  read(j, "max_iterations", c.max_iterations, "");
  if (j.contains("confidence")) {
    std::string name;
    read(j, "confidence", name, "");
    c.metric = nested("confidence: ", [&] { return parse_confidence_metric(name); });
  }
  if (j.contains("early_stop")) {
    const Json& e = j.at("early_stop");
    reject_unknown(e, {"enabled", "patience"}, "early_stop.");
    read(e, "enabled", c.early_stop.enabled, "early_stop.");
    read(e, "patience", c.early_stop.patience, "early_stop.");
  }
  read(j, "validation_fraction", c.validation_fraction, "");
  for (const char* key : {"m_l", "m_u", "m_w"}) {
    if (!j.contains(key)) continue;
    TrainingConfig& t = std::string(key) == "m_l" ? c.m_l : std::string(key) == "m_u" ? c.m_u : c.m_w;
    t = nested(std::string(key) + ".", [&] { return training_config_from_json(j.at(key), t); });
  }
  read(j, "use_representation", c.use_representation, "");
  if (j.contains("representation")) {
    std::string kind;
    read(j, "representation", kind, "");
    if (kind == "vae") {
      c.representation = RepresentationKind::Vae;
    } else if (kind == "autoencoder" || kind == "ae") {
      c.representation = RepresentationKind::Autoencoder;
    } else {
      throw ConfigError("representation: unknown kind '" + kind + "'");
    }
  }
  read(j, "latent_dim", c.latent_dim, "");
  read(j, "embedding_layer", c.embedding_layer, "");
  if (j.contains("mixup")) {
    c.mixup = nested("mixup.", [&] { return mixup_from_json(j.at("mixup"), c.mixup); });
  }
  read(j, "seed", c.seed, "");
  c.validate();
  return c;
}

Json to_json(const IterationMetrics& m) {
  Json per_class = Json::array();
  for (const auto& p : m.per_class_precision) per_class.push_back(optional_json(p));
  return Json{
      {"iteration", m.iteration},
      {"labeled_size", m.labeled_size},
      {"labeled_roots", m.labeled_roots},
      {"unlabeled_size", m.unlabeled_size},
      {"pseudo_total", m.pseudo_total},
      {"added", m.added},
      {"cumulative_added", m.cumulative_added},
      {"shortfall", m.shortfall},
      {"embedding_width", m.embedding_width},
      {"test_accuracy", m.test_accuracy},
      {"test_error", m.test_error},
      {"supervised_test_accuracy", m.supervised_test_accuracy},
      {"validation_accuracy", optional_json(m.validation_accuracy)},
      {"unlabeled_accuracy", optional_json(m.unlabeled_accuracy)},
      {"pseudo_precision", optional_json(m.pseudo_precision)},
      {"per_class_precision", per_class},
      {"mean_selected_confidence", optional_json(m.mean_selected_confidence)},
      {"pseudo_label_noise", optional_json(m.pseudo_label_noise)},
  };
}

IterationMetrics iteration_metrics_from_json(const Json& j) {
  IterationMetrics m;
  m.iteration = j.at("iteration").get<std::size_t>();
  m.labeled_size = j.at("labeled_size").get<std::size_t>();
  m.labeled_roots = j.at("labeled_roots").get<std::size_t>();
  m.unlabeled_size = j.at("unlabeled_size").get<std::size_t>();
  m.pseudo_total = j.at("pseudo_total").get<std::size_t>();
  m.added = j.at("added").get<std::size_t>();
  m.cumulative_added = j.at("cumulative_added").get<std::size_t>();
  m.shortfall = j.at("shortfall").get<std::size_t>();
  m.embedding_width = j.at("embedding_width").get<std::size_t>();
  m.test_accuracy = j.at("test_accuracy").get<double>();
  m.test_error = j.at("test_error").get<double>();
  m.supervised_test_accuracy = j.at("supervised_test_accuracy").get<double>();
  m.validation_accuracy = optional_from(j, "validation_accuracy");
  m.unlabeled_accuracy = optional_from(j, "unlabeled_accuracy");
  m.pseudo_precision = optional_from(j, "pseudo_precision");
  for (const auto& p : j.at("per_class_precision")) {
    m.per_class_precision.push_back(p.is_null() ? std::nullopt : std::optional<double>(p.get<double>()));
  }
  m.mean_selected_confidence = optional_from(j, "mean_selected_confidence");
  m.pseudo_label_noise = optional_from(j, "pseudo_label_noise");
  return m;
}

Json history_summary(const RunHistory& h) {
  Json j{{"iterations", h.records.size()},
         {"n_per_class", h.n_per_class},
         {"quota", h.quota},
         {"best_iteration", h.best_iteration},
         {"stop_reason", h.stop_reason}};
  if (!h.records.empty()) {
    j["baseline_test_accuracy"] = h.baseline_accuracy();
    j["best_test_accuracy"] = h.best().test_accuracy;
    j["best_validation_accuracy"] = optional_json(h.best().validation_accuracy);
    j["final_test_accuracy"] = h.records.back().test_accuracy;
  }
  return j;
}

void write_history_jsonl(const std::filesystem::path& path, const RunHistory& h) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : h.records) out << to_json(r).dump() << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<IterationMetrics> read_history_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::vector<IterationMetrics> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(iteration_metrics_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

double history_distance(const std::vector<IterationMetrics>& a,
                        const std::vector<IterationMetrics>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Json ja = to_json(a[i]), jb = to_json(b[i]);
    for (const auto& [key, va] : ja.items()) {
      const Json& vb = jb.at(key);
      if (va.is_number() && vb.is_number()) {
        worst = std::max(worst, std::abs(va.get<double>() - vb.get<double>()));
      } else if (va != vb) {
        const bool both_arrays = va.is_array() && vb.is_array() && va.size() == vb.size();
        if (!both_arrays) return std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < va.size(); ++k) {
          if (va[k].is_number() && vb[k].is_number()) {
            worst = std::max(worst, std::abs(va[k].get<double>() - vb[k].get<double>()));
          } else if (va[k] != vb[k]) {
            return std::numeric_limits<double>::infinity();
          }
        }
      }
    }
  }
  return worst;
}

}  // namespace pseudorep
