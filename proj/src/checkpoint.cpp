#include "pseudorep/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "pseudorep/errors.hpp"

namespace pseudorep {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'L', 'C', 'K', 'P', 'T', '\0'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written in native little-endian order");

struct TensorRef {
  std::string name;
  const FloatMatrix* matrix = nullptr;
  std::vector<float> flat;
};

Json shape_json(const Shape& s) { return Json(s.dims); }

Json standardizer_json(const ClassifierModel& m) { return m.standardizer ? Json(true) : Json(false); }

void add_network(const std::string& prefix, const nn::Network<float>& net,
                 std::vector<TensorRef>& tensors) {
  for (const auto& p : net.parameters()) tensors.push_back({prefix + p.name, &p.value, {}});
}

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("checkpoint truncated while reading " + what);
  return v;
}

Json read_header(std::ifstream& in, const std::filesystem::path& path) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError(path.string() + ": not a checkpoint (bad magic)");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kCheckpointFormatVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = get<std::uint64_t>(in, "header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw FormatError(path.string() + ": truncated header");
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad header: " + e.what());
  }
}

}  // namespace

const ClassifierModel& CheckpointBundle::classifier(const std::string& role) const {
  for (const auto& [r, m] : classifiers) {
    if (r == role) return m;
  }
  throw InputError("checkpoint has no classifier '" + role + "'");
}

const RepresentationModel& CheckpointBundle::representation(const std::string& role) const {
  for (const auto& [r, m] : representations) {
    if (r == role) return m;
  }
  throw InputError("checkpoint has no representation model '" + role + "'");
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointBundle& bundle) {
  std::vector<TensorRef> tensors;
  Json models = Json::object();
  for (const auto& [role, m] : bundle.classifiers) {
    models[role] = Json{{"type", "classifier"},
                        {"model_id", m.model_id},
                        {"architecture", nn::to_json(m.network.architecture())},
                        {"num_classes", m.num_classes},
                        {"input_shape", shape_json(m.input_shape)},
                        {"config", to_json(m.config)},
                        {"standardized", standardizer_json(m)},
                        {"loss_history", m.loss_history}};
    add_network(role + "/", m.network, tensors);
    if (m.standardizer) {
      tensors.push_back({role + "/standardizer.mean", nullptr, m.standardizer->mean});
      tensors.push_back({role + "/standardizer.inv_std", nullptr, m.standardizer->inv_std});
    }
  }
  for (const auto& [role, m] : bundle.representations) {
    models[role] = Json{{"type", "representation"},
                        {"model_id", m.model_id},
                        {"kind", to_string(m.kind)},
                        {"latent_dim", m.latent_dim},
                        {"input_shape", shape_json(m.input_shape)},
                        {"encoder", nn::to_json(m.encoder.architecture())},
                        {"decoder", nn::to_json(m.decoder.architecture())},
                        {"config", to_json(m.config)},
                        {"loss_history", m.loss_history},
                        {"warnings", m.warnings}};
    add_network(role + "/encoder.", m.encoder, tensors);
    add_network(role + "/decoder.", m.decoder, tensors);
  }
  Json table = Json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    const std::uint64_t rows = t.matrix ? static_cast<std::uint64_t>(t.matrix->rows()) : 1;
    const std::uint64_t cols =
        t.matrix ? static_cast<std::uint64_t>(t.matrix->cols()) : t.flat.size();
    table.push_back(Json{{"name", t.name}, {"shape", {rows, cols}}, {"offset", offset}});
    offset += rows * cols * sizeof(float);
  }
  Json header{{"format", "pseudorep-checkpoint"},
              {"format_version", kCheckpointFormatVersion},
              {"dtype", "float32-le"},
              {"models", models},
              {"tensors", table},
              {"metadata", bundle.metadata}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, 8);
  put<std::uint32_t>(out, kCheckpointFormatVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors) {
    const float* data = t.matrix ? t.matrix->data() : t.flat.data();
    const std::size_t n = t.matrix ? static_cast<std::size_t>(t.matrix->size()) : t.flat.size();
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
  }
  if (!out) throw Error("failed writing " + path.string());
}

Json read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_header(in, path);
}

CheckpointBundle read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  const Json header = read_header(in, path);
  const auto payload_start = in.tellg();

  auto load_tensor = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    for (const auto& t : header.at("tensors")) {
      if (t.at("name").get<std::string>() != name) continue;
      const auto shape = t.at("shape").get<std::vector<std::uint64_t>>();
      if (shape.size() != 2 || shape[0] != static_cast<std::uint64_t>(rows) ||
          shape[1] != static_cast<std::uint64_t>(cols)) {
        throw FormatError("checkpoint tensor " + name + " has an unexpected shape");
      }
      FloatMatrix m(rows, cols);
      in.seekg(payload_start + static_cast<std::streamoff>(t.at("offset").get<std::uint64_t>()));
      in.read(reinterpret_cast<char*>(m.data()),
              static_cast<std::streamsize>(m.size() * static_cast<Eigen::Index>(sizeof(float))));
      if (!in) throw FormatError("checkpoint truncated in tensor " + name);
      return m;
    }
    throw FormatError("checkpoint lacks tensor " + name);
  };
  auto load_network = [&](const std::string& prefix, nn::Network<float>& net) {
    for (auto& p : net.parameters()) p.value = load_tensor(prefix + p.name, p.value.rows(), p.value.cols());
  };

  CheckpointBundle bundle;
  try {
    bundle.metadata = header.value("metadata", Json::object());
    for (const auto& [role, j] : header.at("models").items()) {
      const Shape shape{j.at("input_shape").get<std::vector<std::size_t>>()};
      if (j.at("type") == "classifier") {
        ClassifierModel m;
        m.model_id = j.at("model_id").get<std::string>();
        m.network = nn::Network<float>(nn::architecture_from_json(j.at("architecture")));
        m.num_classes = j.at("num_classes").get<int>();
        m.input_shape = shape;
        m.config = training_config_from_json(j.at("config"));
        m.loss_history = j.at("loss_history").get<std::vector<double>>();
        load_network(role + "/", m.network);
        if (j.at("standardized").get<bool>()) {
          const auto d = static_cast<Eigen::Index>(m.network.architecture().input_size);
          const FloatMatrix mean = load_tensor(role + "/standardizer.mean", 1, d);
          const FloatMatrix inv = load_tensor(role + "/standardizer.inv_std", 1, d);
          m.standardizer = Standardizer{{mean.data(), mean.data() + d}, {inv.data(), inv.data() + d}};
        }
        bundle.classifiers.emplace_back(role, std::move(m));
      } else {
        RepresentationModel m;
        m.model_id = j.at("model_id").get<std::string>();
        m.kind = j.at("kind") == "vae" ? RepresentationKind::Vae : RepresentationKind::Autoencoder;
        m.latent_dim = j.at("latent_dim").get<std::size_t>();
        m.input_shape = shape;
        m.encoder = nn::Network<float>(nn::architecture_from_json(j.at("encoder")));
        m.decoder = nn::Network<float>(nn::architecture_from_json(j.at("decoder")));
        m.config = training_config_from_json(j.at("config"));
        m.loss_history = j.at("loss_history").get<std::vector<double>>();
        m.warnings = j.at("warnings").get<std::vector<std::string>>();
        load_network(role + "/encoder.", m.encoder);
        load_network(role + "/decoder.", m.decoder);
        bundle.representations.emplace_back(role, std::move(m));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed checkpoint header: " + e.what());
  }
  return bundle;
}

}  // namespace pseudorep
