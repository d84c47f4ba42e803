#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pseudorep/dataset.hpp"

namespace pseudorep {

using Json = nlohmann::ordered_json;

/// Description written next to every generated dataset.
struct DatasetManifest {
  std::string name;
  std::string generator;
  int num_classes = 0;
  std::vector<std::size_t> shape;
  std::uint64_t seed = 0;
  std::vector<std::size_t> counts;
  Json params = Json::object();
  std::string content_hash;
};

Json to_json(const DatasetManifest& m);
DatasetManifest dataset_manifest_from_json(const Json& j);

/// Writes samples.idx + labels.idx (images) or samples.csv (signals) and
/// manifest.json into `dir`, which must exist.
void write_dataset_dir(const std::filesystem::path& dir, const Dataset& dataset,
                       DatasetManifest manifest);

/// Loads a directory written by write_dataset_dir.
Dataset load_dataset_dir(const std::filesystem::path& dir);

}  // namespace pseudorep
