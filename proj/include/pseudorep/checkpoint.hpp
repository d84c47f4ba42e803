#pragma once

// Binary model container:
//   "PRLCKPT\0" | uint32 format_version | uint64 header_bytes | JSON header |
//   float32 little-endian tensor payloads, in header order.
// The header names every tensor with its shape and byte offset and carries
// each model's architecture, training config and metadata.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pseudorep/manifest.hpp"
#include "pseudorep/models.hpp"

namespace pseudorep {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct CheckpointBundle {
  /// Free-form: run config, seed, metric history.
  Json metadata = Json::object();
  std::vector<std::pair<std::string, ClassifierModel>> classifiers;
  std::vector<std::pair<std::string, RepresentationModel>> representations;

  const ClassifierModel& classifier(const std::string& role) const;
  const RepresentationModel& representation(const std::string& role) const;
};

void write_checkpoint(const std::filesystem::path& path, const CheckpointBundle& bundle);
/// Throws FormatError on a bad magic, unknown version or truncated payload.
CheckpointBundle read_checkpoint(const std::filesystem::path& path);
Json read_checkpoint_header(const std::filesystem::path& path);

}  // namespace pseudorep
