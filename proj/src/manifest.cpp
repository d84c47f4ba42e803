#include "pseudorep/manifest.hpp"

#include <fstream>

#include "pseudorep/errors.hpp"
#include "pseudorep/io.hpp"

namespace pseudorep {

Json to_json(const DatasetManifest& m) {
  return Json{{"name", m.name},       {"num_classes", m.num_classes},
              {"shape", m.shape},     {"seed", m.seed},
              {"generator", m.generator}, {"counts", m.counts},
              {"params", m.params},   {"content_hash", m.content_hash}};
}

DatasetManifest dataset_manifest_from_json(const Json& j) {
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  m.generator = j.at("generator").get<std::string>();
  m.num_classes = j.at("num_classes").get<int>();
  m.shape = j.at("shape").get<std::vector<std::size_t>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.counts = j.at("counts").get<std::vector<std::size_t>>();
  if (j.contains("params")) m.params = j.at("params");
  if (j.contains("content_hash")) m.content_hash = j.at("content_hash").get<std::string>();
  return m;
}

void write_dataset_dir(const std::filesystem::path& dir, const Dataset& dataset,
                       DatasetManifest manifest) {
  manifest.num_classes = dataset.num_classes();
  manifest.shape = dataset.shape().dims;
  manifest.counts = dataset.has_labels() ? dataset.class_counts()
                                         : std::vector<std::size_t>{dataset.size()};
  manifest.content_hash = dataset.content_hash();
  if (dataset.shape().is_image()) {
    write_idx(dir / "samples.idx", dataset, IdxDtype::Float32);
    if (dataset.has_labels()) write_idx_labels(dir / "labels.idx", dataset.labels());
  } else {
    write_signal_csv(dir / "samples.csv", dataset);
  }
  std::ofstream out(dir / "manifest.json");
  out << to_json(manifest).dump(2) << '\n';
  if (!out) throw Error("cannot write manifest in " + dir.string());
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("no manifest.json in " + dir.string());
  const auto m = dataset_manifest_from_json(Json::parse(in));
  Dataset d;
  if (std::filesystem::exists(dir / "samples.idx")) {
    const auto labels = dir / "labels.idx";
    d = load_idx(dir / "samples.idx", std::filesystem::exists(labels) ? labels
                                                                      : std::filesystem::path{});
  } else {
    if (m.shape.size() != 1) throw FormatError("signal manifest must have a 1-D shape");
    d = load_signal_csv(dir / "samples.csv", m.shape[0]);
  }
  // The manifest's class count wins over max(label) + 1.
  if (m.num_classes > d.num_classes()) d = d.with_num_classes(m.num_classes);
  return d;
}

}  // namespace pseudorep
