#include "pseudorep/nn.hpp"

#include "pseudorep/errors.hpp"

namespace pseudorep::nn {

template class Network<float>;
template class Network<double>;

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::ReLU: return "relu";
    case LayerKind::MaxPool2: return "maxpool2";
    case LayerKind::Dense: return "dense";
    case LayerKind::Dropout: return "dropout";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (auto k : {LayerKind::Conv2d, LayerKind::ReLU, LayerKind::MaxPool2,
                 LayerKind::Dense, LayerKind::Dropout}) {
    if (to_string(k) == name) return k;
  }
  throw FormatError("unknown layer kind '" + std::string(name) + "'");
}

std::size_t LayerSpec::input_size() const {
  switch (kind) {
    case LayerKind::Conv2d:
    case LayerKind::MaxPool2:
      return channels * height * width;
    case LayerKind::Dense:
      return in_features;
    default:
      return in_features;
  }
}

std::size_t LayerSpec::output_size() const {
  switch (kind) {
    case LayerKind::Conv2d:
      return filters * height * width;
    case LayerKind::MaxPool2:
      return channels * (height / 2) * (width / 2);
    case LayerKind::Dense:
      return out_features;
    default:
      return in_features;
  }
}

std::size_t Architecture::output_size() const { return width_at(layers.size()); }

std::size_t Architecture::width_at(std::size_t index) const {
  if (index > layers.size()) throw InputError("layer index out of range");
  return index == 0 ? input_size : layers[index - 1].output_size();
}

std::optional<std::size_t> Architecture::tap_index(std::string_view name) const {
  for (const auto& t : taps) {
    if (t.name == name) return t.index;
  }
  return std::nullopt;
}

std::vector<std::string> Architecture::tap_names() const {
  std::vector<std::string> out;
  for (const auto& t : taps) out.push_back(t.name);
  return out;
}

void Architecture::validate() const {
  std::size_t width = input_size;
  for (const auto& l : layers) {
    if (l.input_size() != width) {
      throw ConfigError("layer '" + l.name + "' expects input width " +
                        std::to_string(l.input_size()) + ", got " + std::to_string(width));
    }
    if (l.kind == LayerKind::Dropout && !(l.rate >= 0.0 && l.rate < 1.0)) {
      throw ConfigError("dropout rate must be in [0, 1)");
    }
    width = l.output_size();
  }
  for (const auto& t : taps) {
    if (t.index > layers.size()) throw ConfigError("tap '" + t.name + "' out of range");
  }
}

nlohmann::ordered_json to_json(const Architecture& arch) {
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& l : arch.layers) {
    nlohmann::ordered_json j{{"kind", to_string(l.kind)}, {"name", l.name}};
    switch (l.kind) {
      case LayerKind::Conv2d:
        j["filters"] = l.filters;
        j["kernel"] = l.kernel;
        [[fallthrough]];
      case LayerKind::MaxPool2:
        j["channels"] = l.channels;
        j["height"] = l.height;
        j["width"] = l.width;
        break;
      case LayerKind::Dense:
        j["in_features"] = l.in_features;
        j["out_features"] = l.out_features;
        break;
      case LayerKind::Dropout:
        j["rate"] = l.rate;
        [[fallthrough]];
      case LayerKind::ReLU:
        j["in_features"] = l.in_features;
        break;
    }
    layers.push_back(std::move(j));
  }
  nlohmann::ordered_json taps = nlohmann::ordered_json::object();
  for (const auto& t : arch.taps) taps[t.name] = t.index;
  return {{"id", arch.id}, {"input_size", arch.input_size}, {"layers", layers}, {"taps", taps}};
}

Architecture architecture_from_json(const nlohmann::ordered_json& j) {
  Architecture a;
  a.id = j.at("id").get<std::string>();
  a.input_size = j.at("input_size").get<std::size_t>();
  for (const auto& lj : j.at("layers")) {
    LayerSpec l;
    l.kind = parse_layer_kind(lj.at("kind").get<std::string>());
    l.name = lj.at("name").get<std::string>();
    l.channels = lj.value("channels", std::size_t{0});
    l.height = lj.value("height", std::size_t{0});
    l.width = lj.value("width", std::size_t{0});
    l.filters = lj.value("filters", std::size_t{0});
    l.kernel = lj.value("kernel", std::size_t{3});
    l.in_features = lj.value("in_features", std::size_t{0});
    l.out_features = lj.value("out_features", std::size_t{0});
    l.rate = lj.value("rate", 0.0);
    a.layers.push_back(std::move(l));
  }
  for (const auto& [name, idx] : j.at("taps").items()) {
    a.taps.push_back({name, idx.get<std::size_t>()});
  }
  a.validate();
  return a;
}

}  // namespace pseudorep::nn
