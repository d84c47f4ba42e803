#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pseudorep/dataset.hpp"

namespace pseudorep {

/// IDX element type codes (third header byte).
enum class IdxDtype : std::uint8_t {
  UInt8 = 0x08,
  Int8 = 0x09,
  Int16 = 0x0B,
  Int32 = 0x0C,
  Float32 = 0x0D,
  Float64 = 0x0E,
};

struct IdxTensor {
  IdxDtype dtype = IdxDtype::Float32;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;  // row-major, converted from dtype
};

/// Reads a raw IDX tensor. Throws FormatError on a bad header or truncation.
IdxTensor read_idx_tensor(const std::filesystem::path& path);

/// Loads an image tensor (n, H, W), (n, C, H, W) or a signal tensor (n, D).
/// Unsigned-byte payloads are scaled by 1/255. When label_path is non-empty
/// the labels are read from that IDX file and must have n entries.
Dataset load_idx(const std::filesystem::path& path,
                 const std::filesystem::path& label_path = {});

/// Writes the samples as (n, dims...). UInt8 quantizes round(v * 255);
/// Float32 stores the payload bit-exactly (big-endian).
void write_idx(const std::filesystem::path& path, const Dataset& dataset,
               IdxDtype dtype = IdxDtype::Float32);

/// Writes labels as a 1-D UInt8 tensor (Int32 when any label exceeds 255).
void write_idx_labels(const std::filesystem::path& path,
                      std::span<const int> labels);

/// Loads rows of `signal_len` float columns followed by one integer label,
/// no header row.
Dataset load_signal_csv(const std::filesystem::path& path,
                        std::size_t signal_len);

void write_signal_csv(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace pseudorep
