#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ttita/dataset.hpp"
#include "ttita/decoder.hpp"
#include "ttita/encoder.hpp"
#include "ttita/text.hpp"

namespace ttita {

enum class ModelKind { ttita, decoder_only };

/// Every knob of a run, with the standard defaults.
struct Hyperparameters {
  std::size_t numeric_width = 100;
  std::size_t categorical_width = 10;
  std::size_t text_width = 128;
  std::size_t num_layers = 6;
  std::size_t num_heads = 4;
  std::size_t ffn_hidden = 1024;
  double dropout = 0.1;
  double learning_rate = 4e-4;
  std::size_t batch_size = 128;
  std::size_t epochs = 10;
  std::size_t max_len = 32;
  std::size_t vocab_cap = 20000;
  std::uint64_t seed = 0;
  std::size_t memory_chunks = 1;
  /// Auxiliary (numeric / categorical) target columns trained as extra heads.
  std::vector<std::string> mtl_targets;
  ModelKind kind = ModelKind::ttita;

  EncoderConfig encoder() const { return {numeric_width, categorical_width, text_width}; }
  HashConfig hash() const { return HashConfig{text_width, 1, 5, 0}; }

  nlohmann::json to_json() const;
  static Hyperparameters from_json(const nlohmann::json& j);
  bool operator==(const Hyperparameters&) const = default;
};

/// Featurized rows plus encoded supervision for one dataset split.
struct ExampleTable {
  FeatureTable features;
  /// [start] ... [end] ids of the text target, nullopt when missing.
  std::vector<std::optional<std::vector<int>>> targets;
  /// Per numeric head, standardized target per row.
  std::vector<std::vector<std::optional<real>>> numeric_targets;
  /// Per categorical head, level index per row (-1 when missing).
  std::vector<std::vector<int>> categorical_targets;

  std::size_t rows() const { return features.rows; }
  /// Rows whose text target is present, ascending.
  std::vector<std::size_t> supervised_rows() const;
};

/// Loss of one batch. `total` carries the graph; the rest are values with
/// the counts they average over, for exact aggregation across batches.
struct LossBreakdown {
  Tensor total;
  double text = 0;
  std::size_t text_tokens = 0;
  std::vector<double> numeric;  // per numeric head
  std::vector<std::size_t> numeric_count;
  std::vector<double> categorical;  // per categorical head
  std::vector<std::size_t> categorical_count;
};

/// Encoder (unless context-free) + decoder + auxiliary heads on the
/// context vector.
class TtitaModel {
 public:
  TtitaModel(const Schema& schema, const Preprocessing& stats, const Vocab& vocab, const Hyperparameters& hp);

  TtitaModel(const TtitaModel&) = delete;
  TtitaModel& operator=(const TtitaModel&) = delete;
  TtitaModel(TtitaModel&&) = default;

  const Hyperparameters& hyperparameters() const { return hp_; }
  const Schema& schema() const { return schema_; }
  const Preprocessing& preprocessing() const { return stats_; }
  const Vocab& vocab() const { return vocab_; }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }
  const Encoder* encoder() const { return encoder_ ? &*encoder_ : nullptr; }
  const Decoder& decoder() const { return *decoder_; }
  std::size_t d_model() const { return d_model_; }

  const std::vector<std::string>& numeric_heads() const { return numeric_head_names_; }
  const std::vector<std::string>& categorical_heads() const { return categorical_head_names_; }

  ExampleTable make_examples(const Dataset& preprocessed) const;

  /// Context rows [B, d_model]; undefined for a context-free model.
  Tensor context(const FeatureTable& features, std::span<const std::size_t> rows) const;

  /// Teacher-forced decoder input / target ids for `rows` (all must have a
  /// text target). Targets at padding positions are -1.
  static std::pair<TokenBatch, std::vector<int>> teacher_forcing(const ExampleTable& examples,
                                                                   std::span<const std::size_t> rows);

  LossBreakdown loss(const ExampleTable& examples, std::span<const std::size_t> rows, bool training, Rng& rng,
                     DecoderProbe* probe = nullptr) const;

  /// Greedy decoding for `rows`; ids exclude specials [start]/[end].
  std::vector<std::vector<int>> generate(const FeatureTable& features, std::span<const std::size_t> rows) const;
  /// Standardized prediction of each numeric head, [head][row].
  std::vector<std::vector<double>> predict_numeric(const FeatureTable& features, std::span<const std::size_t> rows) const;
  /// Argmax level (excluding the missing level) of each categorical head.
  std::vector<std::vector<std::size_t>> predict_categorical(const FeatureTable& features,
                                                            std::span<const std::size_t> rows) const;

 private:
  Schema schema_;
  Preprocessing stats_;
  Vocab vocab_;
  Hyperparameters hp_;
  nn::ParameterSet params_;
  std::optional<Encoder> encoder_;
  std::optional<Decoder> decoder_;
  std::size_t d_model_ = 0;
  std::vector<std::string> numeric_head_names_;
  std::vector<std::string> categorical_head_names_;
  std::vector<nn::Linear> numeric_heads_;
  std::vector<nn::Linear> categorical_heads_;
};

}  // namespace ttita
