#include <gtest/gtest.h>

#include <fstream>

#include "pseudorep/errors.hpp"
#include "pseudorep/generators.hpp"
#include "pseudorep/io.hpp"
#include "pseudorep/manifest.hpp"
#include "support.hpp"

namespace pseudorep {
namespace {

TEST(Idx, Float32RoundTripIsBitExact) {
  testing::TempDir dir("idx");
  const Dataset d = gen_crack_dataset(4, 8, 3);
  write_idx(dir / "x.idx", d, IdxDtype::Float32);
  write_idx_labels(dir / "y.idx", d.labels());
  const Dataset back = load_idx(dir / "x.idx", dir / "y.idx");
  ASSERT_EQ(back.size(), d.size());
  EXPECT_EQ(back.shape(), d.shape());
  EXPECT_EQ(back.labels(), d.labels());
  for (std::size_t i = 0; i < d.samples().size(); ++i) EXPECT_EQ(back.samples()[i], d.samples()[i]);
}

TEST(Idx, UInt8QuantizesToNearestLevel) {
  testing::TempDir dir("idx8");
  const Dataset d = gen_crack_dataset(2, 8, 5);
  write_idx(dir / "x.idx", d, IdxDtype::UInt8);
  const Dataset back = load_idx(dir / "x.idx");
  for (std::size_t i = 0; i < d.samples().size(); ++i) {
    EXPECT_NEAR(back.samples()[i], d.samples()[i], 0.5 / 255.0 + 1e-6);
  }
  EXPECT_FALSE(back.has_labels());
}

TEST(Idx, HeaderParsing) {
  testing::TempDir dir("idxh");
  {
    std::ofstream out(dir / "t.idx", std::ios::binary);
    const unsigned char bytes[] = {0, 0, 0x08, 2, 0, 0, 0, 2, 0, 0, 0, 3, 1, 2, 3, 4, 5, 6};
    out.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
  }
  const IdxTensor t = read_idx_tensor(dir / "t.idx");
  EXPECT_EQ(t.dtype, IdxDtype::UInt8);
  EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{2, 3}));
  EXPECT_EQ(t.values, (std::vector<double>{1, 2, 3, 4, 5, 6}));
}

TEST(Idx, RejectsBadMagicAndTruncation) {
  testing::TempDir dir("idxbad");
  {
    std::ofstream out(dir / "magic.idx", std::ios::binary);
    out << "\x01\x02\x08\x01";
  }
  EXPECT_THROW(read_idx_tensor(dir / "magic.idx"), FormatError);
  {
    std::ofstream out(dir / "short.idx", std::ios::binary);
    const unsigned char bytes[] = {0, 0, 0x08, 1, 0, 0, 0, 9, 1, 2};
    out.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
  }
  EXPECT_THROW(read_idx_tensor(dir / "short.idx"), FormatError);
  EXPECT_THROW(read_idx_tensor(dir / "missing.idx"), FormatError);
}

TEST(Idx, LabelCountMustMatch) {
  testing::TempDir dir("idxn");
  const Dataset d = gen_crack_dataset(2, 8, 5);
  write_idx(dir / "x.idx", d);
  const std::vector<int> labels{0, 1};
  write_idx_labels(dir / "y.idx", labels);
  EXPECT_THROW(load_idx(dir / "x.idx", dir / "y.idx"), ConsistencyError);
}

TEST(SignalCsv, RoundTrip) {
  testing::TempDir dir("csv");
  const Dataset d = gen_synthetic_signals(3, 4, 16, 0.3, 2);
  write_signal_csv(dir / "s.csv", d);
  const Dataset back = load_signal_csv(dir / "s.csv", 16);
  ASSERT_EQ(back.size(), d.size());
  EXPECT_EQ(back.labels(), d.labels());
  for (std::size_t i = 0; i < d.samples().size(); ++i) {
    EXPECT_FLOAT_EQ(back.samples()[i], d.samples()[i]);
  }
}

TEST(SignalCsv, RejectsMalformedRows) {
  testing::TempDir dir("csvbad");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  EXPECT_THROW(load_signal_csv(write("ragged.csv", "0.1,0.2,0.3,1\n0.1,0.2,1\n"), 3), FormatError);
  EXPECT_THROW(load_signal_csv(write("text.csv", "0.1,abc,0.3,1\n"), 3), FormatError);
  EXPECT_THROW(load_signal_csv(write("nan.csv", "0.1,nan,0.3,1\n"), 3), NonFiniteError);
  EXPECT_THROW(load_signal_csv(write("label.csv", "0.1,0.2,0.3,1.5\n"), 3), FormatError);
  EXPECT_THROW(load_signal_csv(write("empty.csv", ""), 3), EmptyDatasetError);
}

TEST(DatasetDir, WriteThenLoadPreservesContent) {
  testing::TempDir dir("dsdir");
  for (const Dataset& d : {gen_crack_dataset(3, 8, 1), gen_synthetic_signals(2, 3, 12, 0.5, 1)}) {
    const auto sub = dir / std::to_string(d.size());
    std::filesystem::create_directories(sub);
    DatasetManifest m;
    m.name = "t";
    m.generator = "t";
    write_dataset_dir(sub, d, m);
    const Dataset back = load_dataset_dir(sub);
    EXPECT_EQ(back.content_hash(), d.content_hash());
    std::ifstream in(sub / "manifest.json");
    const auto j = Json::parse(in);
    EXPECT_EQ(j.at("content_hash"), d.content_hash());
  }
}

}  // namespace
}  // namespace pseudorep
