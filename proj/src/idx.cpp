#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pseudorep/errors.hpp"
#include "pseudorep/io.hpp"

namespace pseudorep {
namespace {

std::size_t dtype_width(IdxDtype t) {
  switch (t) {
    case IdxDtype::UInt8:
    case IdxDtype::Int8:
      return 1;
    case IdxDtype::Int16:
      return 2;
    case IdxDtype::Int32:
    case IdxDtype::Float32:
      return 4;
    case IdxDtype::Float64:
      return 8;
  }
  return 0;
}

bool valid_dtype(std::uint8_t code) {
  switch (code) {
    case 0x08: case 0x09: case 0x0B: case 0x0C: case 0x0D: case 0x0E:
      return true;
    default:
      return false;
  }
}

template <typename U>
U load_be(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v = static_cast<U>((v << 8) | p[i]);
  return v;
}

template <typename U>
void store_be(std::ostream& out, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    b[sizeof(U) - 1 - i] = static_cast<unsigned char>(v & 0xff);
    v = static_cast<U>(v >> 8);
  }
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

double decode(IdxDtype t, const unsigned char* p) {
  switch (t) {
    case IdxDtype::UInt8:
      return p[0];
    case IdxDtype::Int8:
      return static_cast<std::int8_t>(p[0]);
    case IdxDtype::Int16:
      return static_cast<std::int16_t>(load_be<std::uint16_t>(p));
    case IdxDtype::Int32:
      return static_cast<std::int32_t>(load_be<std::uint32_t>(p));
    case IdxDtype::Float32:
      return std::bit_cast<float>(load_be<std::uint32_t>(p));
    case IdxDtype::Float64:
      return std::bit_cast<double>(load_be<std::uint64_t>(p));
  }
  return 0.0;
}

void write_header(std::ostream& out, IdxDtype dtype,
                  const std::vector<std::uint32_t>& dims) {
  const unsigned char head[4] = {0, 0, static_cast<unsigned char>(dtype),
                                 static_cast<unsigned char>(dims.size())};
  out.write(reinterpret_cast<const char*>(head), 4);
  for (auto d : dims) store_be<std::uint32_t>(out, d);
}

}  // namespace

IdxTensor read_idx_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open IDX file " + path.string());
  unsigned char head[4];
  in.read(reinterpret_cast<char*>(head), 4);
  if (!in) throw FormatError(path.string() + ": truncated IDX header");
  if (head[0] != 0 || head[1] != 0) {
    throw FormatError(path.string() + ": bad IDX magic");
  }
  if (!valid_dtype(head[2])) {
    throw FormatError(path.string() + ": unknown IDX dtype code " +
                      std::to_string(head[2]));
  }
  if (head[3] == 0) throw FormatError(path.string() + ": IDX tensor has no dims");

  IdxTensor t;
  t.dtype = static_cast<IdxDtype>(head[2]);
  std::size_t count = 1;
  for (int i = 0; i < head[3]; ++i) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError(path.string() + ": truncated IDX dims");
    t.dims.push_back(load_be<std::uint32_t>(b));
    count *= t.dims.back();
  }
  const std::size_t width = dtype_width(t.dtype);
  std::vector<unsigned char> raw(count * width);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw FormatError(path.string() + ": IDX payload shorter than header dims");
  }
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    t.values[i] = decode(t.dtype, raw.data() + i * width);
  }
  return t;
}

Dataset load_idx(const std::filesystem::path& path,
                 const std::filesystem::path& label_path) {
  IdxTensor t = read_idx_tensor(path);
  if (t.dims.size() < 2 || t.dims.size() > 4) {
    throw FormatError(path.string() +
                      ": expected (n, D), (n, H, W) or (n, C, H, W) tensor");
  }
  const std::size_t n = t.dims[0];
  Shape shape;
  if (t.dims.size() == 2) {
    shape.dims = {t.dims[1]};
  } else if (t.dims.size() == 3) {
    shape.dims = {1, t.dims[1], t.dims[2]};
  } else {
    shape.dims = {t.dims[1], t.dims[2], t.dims[3]};
  }
  const double scale = t.dtype == IdxDtype::UInt8 ? 1.0 / 255.0 : 1.0;
  std::vector<float> samples(t.values.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<float>(t.values[i] * scale);
  }
  std::vector<SampleId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = SampleId{i};

  std::optional<std::vector<int>> labels;
  int num_classes = 1;
  if (!label_path.empty()) {
    IdxTensor lt = read_idx_tensor(label_path);
    if (lt.dims.size() != 1) {
      throw FormatError(label_path.string() + ": label tensor must be 1-D");
    }
    if (lt.dims[0] != n) {
      throw ConsistencyError("image file has " + std::to_string(n) +
                             " samples but label file has " +
                             std::to_string(lt.dims[0]));
    }
    labels.emplace();
    labels->reserve(n);
    for (double v : lt.values) {
      if (v < 0 || v != std::floor(v)) {
        throw FormatError(label_path.string() + ": labels must be non-negative integers");
      }
      labels->push_back(static_cast<int>(v));
      num_classes = std::max(num_classes, labels->back() + 1);
    }
  }
  return Dataset(std::move(shape), std::move(samples), std::move(ids),
                 std::move(labels), num_classes);
}

void write_idx(const std::filesystem::path& path, const Dataset& dataset,
               IdxDtype dtype) {
  if (dtype != IdxDtype::Float32 && dtype != IdxDtype::UInt8) {
    throw ConfigError("write_idx supports UInt8 and Float32 payloads");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(dataset.size())};
  for (auto d : dataset.shape().dims) dims.push_back(static_cast<std::uint32_t>(d));
  write_header(out, dtype, dims);
  for (float v : dataset.samples()) {
    if (dtype == IdxDtype::Float32) {
      store_be<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    } else {
      const float c = std::clamp(v, 0.0f, 1.0f);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0f))));
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_idx_labels(const std::filesystem::path& path,
                      std::span<const int> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  int max_label = 0;
  for (int y : labels) max_label = std::max(max_label, y);
  const IdxDtype dtype = max_label > 255 ? IdxDtype::Int32 : IdxDtype::UInt8;
  write_header(out, dtype, {static_cast<std::uint32_t>(labels.size())});
  for (int y : labels) {
    if (dtype == IdxDtype::UInt8) {
      out.put(static_cast<char>(static_cast<unsigned char>(y)));
    } else {
      store_be<std::uint32_t>(out, static_cast<std::uint32_t>(y));
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace pseudorep
