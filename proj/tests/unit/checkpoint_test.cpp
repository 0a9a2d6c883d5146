#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "ttita/checkpoint.hpp"
#include "ttita/error.hpp"
#include "ttita/io.hpp"
#include "ttita/trainer.hpp"

namespace {

using namespace ttita;

Checkpoint tiny_checkpoint() {
  const Dataset raw = support::tiny_rows();
  auto hp = support::tiny_hp();
  hp.epochs = 2;
  return fit(raw, raw, hp).checkpoint;
}

TEST(Checkpoint, LayoutStartsWithMagicAndManifestLength) {
  const std::string bytes = tiny_checkpoint().serialize();
  ASSERT_GT(bytes.size(), 14u);
  EXPECT_EQ(bytes.substr(0, 6), "TTITA1");
  std::uint64_t len = 0;
  for (int i = 7; i >= 0; --i) len = (len << 8) | static_cast<unsigned char>(bytes[6 + i]);
  const auto manifest = nlohmann::json::parse(bytes.substr(14, len));
  std::size_t payload = 0;
  for (const auto& t : manifest.at("tensors")) {
    EXPECT_EQ(t.at("offset").get<std::size_t>(), payload);
    payload += t.at("nbytes").get<std::size_t>();
  }
  EXPECT_EQ(bytes.size(), 14 + len + payload);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  const Checkpoint a = tiny_checkpoint();
  const std::string bytes = a.serialize();
  const Checkpoint b = Checkpoint::deserialize(bytes);
  EXPECT_EQ(b.serialize(), bytes);
  EXPECT_EQ(b.tensors, a.tensors);
  EXPECT_EQ(b.hyperparameters, a.hyperparameters);
  EXPECT_EQ(b.vocab.size(), a.vocab.size());
}

TEST(Checkpoint, SaveLoadThroughFile) {
  const Checkpoint a = tiny_checkpoint();
  const auto path = std::filesystem::temp_directory_path() / "ttita_ckpt_test.bin";
  a.save(path);
  const Checkpoint b = Checkpoint::load(path);
  EXPECT_EQ(b.serialize(), a.serialize());
  std::filesystem::remove(path);
  EXPECT_THROW(Checkpoint::load(path), IoError);
}

TEST(Checkpoint, InstantiateReproducesModel) {
  const Checkpoint a = tiny_checkpoint();
  const TtitaModel m1 = a.instantiate();
  const TtitaModel m2 = Checkpoint::deserialize(a.serialize()).instantiate();
  const auto ex = m1.make_examples(preprocess(support::tiny_rows(), m1.preprocessing()));
  const std::vector<std::size_t> rows{0, 1};
  EXPECT_EQ(m1.generate(ex.features, rows), m2.generate(ex.features, rows));
  EXPECT_EQ(Checkpoint::from_model(m1, a.training).serialize(), a.serialize());
}

TEST(Checkpoint, CorruptInputRaisesFormatError) {
  const std::string bytes = tiny_checkpoint().serialize();
  EXPECT_THROW(Checkpoint::deserialize(""), FormatError);
  EXPECT_THROW(Checkpoint::deserialize("TTITA2" + bytes.substr(6)), FormatError);
  EXPECT_THROW(Checkpoint::deserialize(bytes.substr(0, 10)), FormatError);
  EXPECT_THROW(Checkpoint::deserialize(bytes.substr(0, bytes.size() - 1)), FormatError);
  EXPECT_THROW(Checkpoint::deserialize(bytes + "x"), FormatError);
  std::string broken = bytes;
  broken[14] = '#';
  EXPECT_THROW(Checkpoint::deserialize(broken), FormatError);
}

}  // namespace
