#include <gtest/gtest.h>

#include <fstream>

#include "pseudorep/checkpoint.hpp"
#include "pseudorep/errors.hpp"
#include "pseudorep/generators.hpp"
#include "support.hpp"

namespace pseudorep {
namespace {

TEST(Checkpoint, RoundTripPreservesPredictionsBitwise) {
  testing::TempDir dir("ckpt");
  const Dataset d = gen_synthetic_classes(3, 10, 16, 0.5, 1);
  TrainingConfig c;
  c.epochs = 2;
  const ClassifierModel m_l = train_classifier(d, c);
  const RepresentationModel m_u = train_vae(d, 4, c);
  const Embedding w = concat_embeddings(embed(m_l, d), embed(m_u, d));
  const ClassifierModel m_w = train_head(w, d.labels(), 3, c);

  CheckpointBundle b;
  b.metadata = Json{{"note", "t"}};
  b.classifiers.emplace_back("m_l", m_l);
  b.classifiers.emplace_back("m_w", m_w);
  b.representations.emplace_back("m_u", m_u);
  write_checkpoint(dir / "a.ckpt", b);

  const CheckpointBundle r = read_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(r.metadata.at("note"), "t");
  EXPECT_EQ((predict_proba(r.classifier("m_l"), d) - predict_proba(m_l, d)).cwiseAbs().maxCoeff(), 0.0f);
  const RepresentationModel& u = r.representation("m_u");
  EXPECT_EQ(u.kind, RepresentationKind::Vae);
  EXPECT_EQ((encode_mean(u, as_matrix(d)) - encode_mean(m_u, as_matrix(d))).cwiseAbs().maxCoeff(), 0.0f);
  EXPECT_EQ((predict_proba(r.classifier("m_w"), w) - predict_proba(m_w, w)).cwiseAbs().maxCoeff(), 0.0f);
  EXPECT_EQ(r.classifier("m_w").model_id, m_w.model_id);
  EXPECT_THROW(r.classifier("nope"), InputError);

  const Json h = read_checkpoint_header(dir / "a.ckpt");
  EXPECT_EQ(h.at("format_version"), kCheckpointFormatVersion);
  EXPECT_EQ(h.at("dtype"), "float32-le");
}

TEST(Checkpoint, RejectsForeignAndTruncatedFiles) {
  testing::TempDir dir("ckbad");
  std::ofstream(dir / "x.ckpt") << "not a checkpoint at all";
  EXPECT_THROW(read_checkpoint(dir / "x.ckpt"), FormatError);

  CheckpointBundle b;
  TrainingConfig c;
  c.epochs = 1;
  b.classifiers.emplace_back("m", train_classifier(gen_synthetic_classes(2, 4, 8, 0.5, 1), c));
  write_checkpoint(dir / "ok.ckpt", b);
  const auto size = std::filesystem::file_size(dir / "ok.ckpt");
  std::filesystem::copy_file(dir / "ok.ckpt", dir / "cut.ckpt");
  std::filesystem::resize_file(dir / "cut.ckpt", size - 16);
  EXPECT_THROW(read_checkpoint(dir / "cut.ckpt"), FormatError);

  std::fstream f(dir / "ok.ckpt", std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(8);
  const std::uint32_t v = 99;
  f.write(reinterpret_cast<const char*>(&v), 4);
  f.close();
  EXPECT_THROW(read_checkpoint(dir / "ok.ckpt"), FormatError);
}

}  // namespace
}  // namespace pseudorep
