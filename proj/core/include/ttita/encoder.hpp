#pragma once

#include <span>
#include <string>
#include <vector>

#include "ttita/dataset.hpp"
#include "ttita/hashing.hpp"
#include "ttita/nn.hpp"

namespace ttita {

struct EncoderConfig {
  std::size_t numeric_width = 100;     // d_n
  std::size_t categorical_width = 10;  // d_c, per categorical column
  std::size_t text_width = 128;        // d_t, per text column
};

/// Model inputs of a preprocessed dataset, featurized once. Text columns
/// are hashed here; they carry no trainable parameters.
struct FeatureTable {
  std::size_t rows = 0;
  std::size_t numeric_columns = 0;
  std::vector<real> numeric;                 // rows x numeric_columns
  std::vector<std::vector<int>> categorical;  // [column][row] level index
  std::vector<std::vector<real>> text;        // [column] rows x text_width
  std::size_t text_width = 0;
};

/// Featurizes the input columns of a filled, standardized dataset.
FeatureTable featurize(const Dataset& dataset, const HashConfig& hash);

/// Flat context vector of one row.
struct ContextVector {
  std::vector<real> values;
  std::size_t size() const { return values.size(); }
};

/// Numeric block (one shared FC layer over all numeric inputs), then one
/// embedding + FC block per categorical input, then one hashed block per
/// text input. Block order follows schema order within each kind.
class Encoder {
 public:
  Encoder(const Schema& schema, const Preprocessing& stats, const EncoderConfig& config, nn::ParameterSet& params,
          Rng& rng);

  std::size_t d_model() const { return d_model_; }
  const EncoderConfig& config() const { return config_; }

  /// [B, n_numeric] standardized inputs -> [B, d_n].
  Tensor encode_numeric(const Tensor& values) const;
  /// Level indices of categorical input `column` -> [B, d_c].
  Tensor encode_categorical(std::size_t column, std::span<const int> levels) const;
  /// Hashed text block -> [B, d_t] constant.
  static Tensor encode_text(std::span<const std::string> texts, const HashConfig& hash);

  /// Context rows [B, d_model] for `rows` of a feature table.
  Tensor build_context(const FeatureTable& features, std::span<const std::size_t> rows) const;
  ContextVector build_context(const FeatureTable& features, std::size_t row) const;

 private:
  EncoderConfig config_;
  std::size_t d_model_ = 0;
  std::size_t numeric_inputs_ = 0;
  std::size_t text_inputs_ = 0;
  nn::Linear numeric_fc_;
  std::vector<nn::Embedding> categorical_embedding_;
  std::vector<nn::Linear> categorical_fc_;
};

}  // namespace ttita
