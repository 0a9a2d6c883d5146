#include "ttita/encoder.hpp"

#include "ttita/error.hpp"
#include "ttita/ops.hpp"

namespace ttita {

FeatureTable featurize(const Dataset& dataset, const HashConfig& hash) {
  if (!dataset.filled || !dataset.standardized || !dataset.stats) {
    throw ConfigError("featurize: dataset must be filled and standardized first");
  }
  const auto& schema = dataset.schema();
  const auto& stats = *dataset.stats;
  FeatureTable f;
  f.rows = dataset.rows();
  f.text_width = hash.dimension;
  const auto numeric = schema.inputs(ColumnKind::numeric);
  f.numeric_columns = numeric.size();
  f.numeric.resize(f.rows * f.numeric_columns);
  for (std::size_t c = 0; c < numeric.size(); ++c) {
    const auto& col = dataset.column(numeric[c]);
    for (std::size_t r = 0; r < f.rows; ++r) f.numeric[r * f.numeric_columns + c] = static_cast<real>(col.numbers[r].value_or(0.0));
  }
  for (const auto& name : schema.inputs(ColumnKind::categorical)) {
    const auto& map = stats.category_maps.at(name);
    const auto& col = dataset.column(name);
    std::vector<int> idx(f.rows);
    for (std::size_t r = 0; r < f.rows; ++r) idx[r] = static_cast<int>(map.index_of(col.strings[r]));
    f.categorical.push_back(std::move(idx));
  }
  for (const auto& name : schema.inputs(ColumnKind::text)) {
    const auto& col = dataset.column(name);
    std::vector<real> block(f.rows * hash.dimension);
    for (std::size_t r = 0; r < f.rows; ++r) {
      const auto v = hash_features(col.strings[r].value_or(""), hash);
      std::copy(v.begin(), v.end(), block.begin() + static_cast<std::ptrdiff_t>(r * hash.dimension));
    }
    f.text.push_back(std::move(block));
  }
  return f;
}

Encoder::Encoder(const Schema& schema, const Preprocessing& stats, const EncoderConfig& config, nn::ParameterSet& params,
                 Rng& rng)
    : config_(config) {
  if (config.numeric_width == 0 || config.categorical_width == 0 || config.text_width == 0) {
    throw ConfigError("encoder widths must be positive");
  }
  numeric_inputs_ = schema.inputs(ColumnKind::numeric).size();
  if (numeric_inputs_ > 0) {
    numeric_fc_ = nn::Linear::create(params, "encoder.numeric", numeric_inputs_, config.numeric_width, rng);
    d_model_ += config.numeric_width;
  }
  for (const auto& name : schema.inputs(ColumnKind::categorical)) {
    const auto it = stats.category_maps.find(name);
    if (it == stats.category_maps.end()) throw SchemaError("no category map for input '" + name + "'");
    const std::string prefix = "encoder.categorical." + name;
    categorical_embedding_.push_back(
        nn::Embedding::create(params, prefix + ".embedding", it->second.size(), config.categorical_width, rng));
    categorical_fc_.push_back(
        nn::Linear::create(params, prefix + ".fc", config.categorical_width, config.categorical_width, rng));
    d_model_ += config.categorical_width;
  }
  text_inputs_ = schema.inputs(ColumnKind::text).size();
  d_model_ += text_inputs_ * config.text_width;
  if (d_model_ == 0) throw ConfigError("encoder: context vector would be empty");
}

Tensor Encoder::encode_numeric(const Tensor& values) const {
  if (numeric_inputs_ == 0) throw ConfigError("encoder has no numeric inputs");
  return numeric_fc_(values);
}

Tensor Encoder::encode_categorical(std::size_t column, std::span<const int> levels) const {
  if (column >= categorical_fc_.size()) throw ConfigError("encoder: categorical column index out of range");
  return categorical_fc_[column](categorical_embedding_[column](levels));
}

Tensor Encoder::encode_text(std::span<const std::string> texts, const HashConfig& hash) {
  std::vector<real> block;
  block.reserve(texts.size() * hash.dimension);
  for (const auto& t : texts) {
    const auto v = hash_features(t, hash);
    block.insert(block.end(), v.begin(), v.end());
  }
  return Tensor::from({texts.size(), hash.dimension}, std::move(block));
}

Tensor Encoder::build_context(const FeatureTable& features, std::span<const std::size_t> rows) const {
  if (features.numeric_columns != numeric_inputs_ || features.categorical.size() != categorical_fc_.size() ||
      features.text.size() != text_inputs_ || (text_inputs_ > 0 && features.text_width != config_.text_width)) {
    throw SchemaError("feature table does not match the encoder layout");
  }
  const std::size_t b = rows.size();
  std::vector<Tensor> blocks;
  if (numeric_inputs_ > 0) {
    std::vector<real> x(b * numeric_inputs_);
    for (std::size_t i = 0; i < b; ++i)
      std::copy_n(features.numeric.begin() + static_cast<std::ptrdiff_t>(rows[i] * numeric_inputs_), numeric_inputs_,
                  x.begin() + static_cast<std::ptrdiff_t>(i * numeric_inputs_));
    blocks.push_back(encode_numeric(Tensor::from({b, numeric_inputs_}, std::move(x))));
  }
  for (std::size_t c = 0; c < categorical_fc_.size(); ++c) {
    std::vector<int> levels(b);
    for (std::size_t i = 0; i < b; ++i) levels[i] = features.categorical[c][rows[i]];
    blocks.push_back(encode_categorical(c, levels));
  }
  const std::size_t w = features.text_width;
  for (const auto& block : features.text) {
    std::vector<real> x(b * w);
    for (std::size_t i = 0; i < b; ++i)
      std::copy_n(block.begin() + static_cast<std::ptrdiff_t>(rows[i] * w), w, x.begin() + static_cast<std::ptrdiff_t>(i * w));
    blocks.push_back(Tensor::from({b, w}, std::move(x)));
  }
  return blocks.size() == 1 ? blocks.front() : ops::concat(blocks);
}

ContextVector Encoder::build_context(const FeatureTable& features, std::size_t row) const {
  NoGradGuard guard;
  const std::size_t rows[] = {row};
  const auto t = build_context(features, rows);
  return {std::vector<real>(t.data().begin(), t.data().end())};
}

}  // namespace ttita
