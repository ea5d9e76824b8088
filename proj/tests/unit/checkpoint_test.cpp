#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "relsum/checkpoint.hpp"
#include "relsum/checksum.hpp"
#include "relsum/error.hpp"

using namespace relsum;

namespace {

SummarizerModel model() {
  Rng rng(3);
  return SummarizerModel::initialize(5, {2, 3}, {std::string(kUnknownToken), "alpha", "beta", "gamma"}, rng);
}

std::filesystem::path temp_dir(const char* name) {
  auto d = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST(Checkpoint, RoundTripEqualsFloatRounding) {
  const SummarizerModel m = model();
  const SummarizerModel back = deserialize_checkpoint(serialize_checkpoint(m));
  EXPECT_TRUE(back == round_to_float(m));
  EXPECT_EQ(back.vocabulary, m.vocabulary);
  EXPECT_EQ(back.widths, m.widths);
  EXPECT_EQ(back.token_id("beta"), 2);
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(m));
  const auto a = m.tensors();
  const auto b = back.tensors();
  for (std::size_t t = 0; t < a.size(); ++t)
    EXPECT_LE((*a[t].value - *b[t].value).cwiseAbs().maxCoeff(), 1e-7) << a[t].name;
}

TEST(Checkpoint, FileRoundTripAndManifest) {
  const auto dir = temp_dir("relsum_ckpt_ok");
  const SummarizerModel m = model();
  save_checkpoint(m, dir / "m.ckpt");
  EXPECT_TRUE(std::filesystem::exists(dir / "m.ckpt.manifest"));
  EXPECT_EQ(read_file(dir / "m.ckpt.manifest"), checkpoint_manifest(m));
  EXPECT_TRUE(load_checkpoint(dir / "m.ckpt") == round_to_float(m));
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, CorruptionIsDetected) {
  const auto dir = temp_dir("relsum_ckpt_bad");
  save_checkpoint(model(), dir / "m.ckpt");
  std::string bytes = read_file(dir / "m.ckpt");
  bytes[bytes.size() - 3] ^= 0x40;
  {
    std::ofstream out(dir / "m.ckpt", std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt"), Error);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RejectsMalformedBytes) {
  const std::string good = serialize_checkpoint(model());
  EXPECT_THROW(deserialize_checkpoint(good.substr(0, good.size() - 1)), Error);
  EXPECT_THROW(deserialize_checkpoint(good + "x"), Error);
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad_magic), Error);
}
