#include <gtest/gtest.h>

#include <cmath>

#include "suites.hpp"
#include "ttita/encoder.hpp"
#include "ttita/error.hpp"
#include "ttita/ops.hpp"

namespace {

using namespace ttita;

Schema gift_cards_schema() {
  return Schema({{"overall", ColumnKind::numeric, ColumnRole::input},
                 {"verified", ColumnKind::categorical, ColumnRole::input},
                 {"reviewer_id", ColumnKind::categorical, ColumnRole::input},
                 {"review_text", ColumnKind::text, ColumnRole::input},
                 {"feature", ColumnKind::text, ColumnRole::input},
                 {"summary", ColumnKind::text, ColumnRole::target}});
}

Dataset gift_rows() {
  return support::make_dataset(gift_cards_schema(), {{"5", "true", "A1", "love it", "", "five stars"},
                                                     {"1", "false", "A2", "broken card", "digital", "bad"},
                                                     {"", "true", "A1", "", "digital", "ok"}});
}

TEST(Encoder, GiftCardsContextWidth) {
  const Dataset raw = gift_rows();
  const auto stats = fit_preprocessing(raw);
  nn::ParameterSet params;
  Rng rng(1);
  const Encoder enc(raw.schema(), stats, {}, params, rng);
  EXPECT_EQ(enc.d_model(), 376u);
  const auto features = featurize(preprocess(raw, stats), HashConfig{});
  const std::vector<std::size_t> rows{0, 1, 2};
  const Tensor ctx = enc.build_context(features, rows);
  EXPECT_EQ(ctx.shape(), (Shape{3, 376}));
  EXPECT_EQ(enc.build_context(features, 1).size(), 376u);
}

TEST(Encoder, BlockOrderNumericCategoricalText) {
  const Dataset raw = gift_rows();
  const auto stats = fit_preprocessing(raw);
  nn::ParameterSet params;
  Rng rng(1);
  const Encoder enc(raw.schema(), stats, {}, params, rng);
  const auto features = featurize(preprocess(raw, stats), HashConfig{});
  const auto v = enc.build_context(features, 0).values;
  // Text blocks come last and equal the hashed features directly.
  const auto review = hash_features("love it", HashConfig{});
  for (std::size_t i = 0; i < 128; ++i) EXPECT_EQ(v[120 + i], review[i]);
  // Empty feature text is a zero block.
  for (std::size_t i = 0; i < 128; ++i) EXPECT_EQ(v[248 + i], 0);
}

TEST(Encoder, NumericFcByHand) {
  const Dataset raw = gift_rows();
  const auto stats = fit_preprocessing(raw);
  nn::ParameterSet params;
  Rng rng(1);
  const Encoder enc(raw.schema(), stats, {}, params, rng);
  Tensor weight = *params.find("encoder.numeric.weight");
  std::fill(weight.mutable_data().begin(), weight.mutable_data().end(), real(1));
  const Tensor out = enc.encode_numeric(Tensor::from({1, 1}, {2}));
  for (real x : out.data()) EXPECT_EQ(x, 2);
  std::fill(weight.mutable_data().begin(), weight.mutable_data().end(), real(0));
  const Tensor zero = enc.encode_numeric(Tensor::from({1, 1}, {2}));
  for (real x : zero.data()) EXPECT_EQ(x, 0);
}

TEST(Encoder, NumericGradientIsWeightRowSums) {
  const Dataset raw = gift_rows();
  const auto stats = fit_preprocessing(raw);
  nn::ParameterSet params;
  Rng rng(2);
  const Encoder enc(raw.schema(), stats, {}, params, rng);
  Tensor x = Tensor::from({1, 1}, {0.7}, true);
  ops::sum(enc.encode_numeric(x)).backward();
  const Tensor& w = *params.find("encoder.numeric.weight");
  double row = 0;
  for (real v : w.data()) row += v;
  EXPECT_NEAR(x.grad()[0], row, 1e-5);
}

TEST(Encoder, Categorical) {
  const Dataset raw = gift_rows();
  const auto stats = fit_preprocessing(raw);
  nn::ParameterSet params;
  Rng rng(3);
  const Encoder enc(raw.schema(), stats, {}, params, rng);
  const std::vector<int> same{1, 1}, distinct{1, 2};
  const Tensor a = enc.encode_categorical(0, same);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.at(i), a.at(10 + i));
  const Tensor b = enc.encode_categorical(0, distinct);
  bool differ = false;
  for (std::size_t i = 0; i < 10; ++i) differ |= b.at(i) != b.at(10 + i);
  EXPECT_TRUE(differ);
  const std::vector<int> bad{3};
  EXPECT_THROW(enc.encode_categorical(0, bad), ShapeError);

  Tensor table = *params.find("encoder.categorical.verified.embedding");
  std::fill(table.mutable_data().begin(), table.mutable_data().end(), real(0));
  Tensor bias = *params.find("encoder.categorical.verified.fc.bias");
  bias.mutable_data()[3] = real(0.25);
  const Tensor z = enc.encode_categorical(0, same);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(z.at(i), i == 3 ? real(0.25) : real(0));
}

TEST(Encoder, TextBlockIsUntrainable) {
  const std::vector<std::string> t{"same", "same", ""};
  const Tensor block = Encoder::encode_text(t, HashConfig{});
  EXPECT_FALSE(block.requires_grad());
  for (std::size_t i = 0; i < 128; ++i) {
    EXPECT_EQ(block.at(i), block.at(128 + i));
    EXPECT_EQ(block.at(256 + i), 0);
  }
}

TEST(Encoder, GradientsReachNumericAndCategoricalParameters) {
  const Dataset raw = gift_rows();
  const auto stats = fit_preprocessing(raw);
  nn::ParameterSet params;
  Rng rng(4);
  const Encoder enc(raw.schema(), stats, {}, params, rng);
  const auto features = featurize(preprocess(raw, stats), HashConfig{});
  const std::vector<std::size_t> rows{0, 1};
  support::project(enc.build_context(features, rows), 1).backward();
  for (const auto& [name, t] : params.entries()) {
    ASSERT_TRUE(t.has_grad()) << name;
    double norm = 0;
    for (real g : t.grad()) norm += std::abs(g);
    EXPECT_GT(norm, 0) << name;
  }
}

}  // namespace
