#include "ttita/model.hpp"

#include <algorithm>

#include "ttita/error.hpp"
#include "ttita/losses.hpp"
#include "ttita/ops.hpp"

namespace ttita {

nlohmann::json Hyperparameters::to_json() const {
  return {{"numeric_width", numeric_width},
          {"categorical_width", categorical_width},
          {"text_width", text_width},
          {"num_layers", num_layers},
          {"num_heads", num_heads},
          {"ffn_hidden", ffn_hidden},
          {"dropout", dropout},
          {"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"max_len", max_len},
          {"vocab_cap", vocab_cap},
          {"seed", seed},
          {"memory_chunks", memory_chunks},
          {"mtl_targets", mtl_targets},
          {"model", kind == ModelKind::ttita ? "ttita" : "decoder"}};
}

Hyperparameters Hyperparameters::from_json(const nlohmann::json& j) {
  Hyperparameters hp;
  auto read = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("numeric_width", hp.numeric_width);
  read("categorical_width", hp.categorical_width);
  read("text_width", hp.text_width);
  read("num_layers", hp.num_layers);
  read("num_heads", hp.num_heads);
  read("ffn_hidden", hp.ffn_hidden);
  read("dropout", hp.dropout);
  read("learning_rate", hp.learning_rate);
  read("batch_size", hp.batch_size);
  read("epochs", hp.epochs);
  read("max_len", hp.max_len);
  read("vocab_cap", hp.vocab_cap);
  read("seed", hp.seed);
  read("memory_chunks", hp.memory_chunks);
  read("mtl_targets", hp.mtl_targets);
  if (j.contains("model")) {
    const auto m = j.at("model").get<std::string>();
    if (m == "ttita") {
      hp.kind = ModelKind::ttita;
    } else if (m == "decoder") {
      hp.kind = ModelKind::decoder_only;
    } else {
      throw ConfigError("unknown model kind '" + m + "'");
    }
  }
  return hp;
}

std::vector<std::size_t> ExampleTable::supervised_rows() const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < targets.size(); ++r)
    if (targets[r]) rows.push_back(r);
  return rows;
}

TtitaModel::TtitaModel(const Schema& schema, const Preprocessing& stats, const Vocab& vocab, const Hyperparameters& hp)
    : schema_(schema), stats_(stats), vocab_(vocab), hp_(hp) {
  Rng rng(hp.seed);
  if (hp.kind == ModelKind::ttita) {
    encoder_.emplace(schema, stats, hp.encoder(), params_, rng);
    d_model_ = encoder_->d_model();
  } else {
    if (!hp.mtl_targets.empty()) throw ConfigError("a context-free decoder cannot train auxiliary heads");
    // Without a context vector, size the decoder as the full model would be.
    d_model_ = (schema.inputs(ColumnKind::numeric).empty() ? 0 : hp.numeric_width) +
               schema.inputs(ColumnKind::categorical).size() * hp.categorical_width +
               schema.inputs(ColumnKind::text).size() * hp.text_width;
  }
  DecoderConfig dc;
  dc.d_model = d_model_;
  dc.vocab_size = vocab.size();
  dc.num_layers = hp.num_layers;
  dc.num_heads = hp.num_heads;
  dc.ffn_hidden = hp.ffn_hidden;
  dc.dropout = hp.dropout;
  dc.max_len = hp.max_len;
  dc.memory_chunks = hp.memory_chunks;
  dc.cross_attention = hp.kind == ModelKind::ttita;
  decoder_.emplace(dc, params_, rng);

  for (const auto& name : hp.mtl_targets) {
    const auto& col = schema.at(name);
    if (col.role != ColumnRole::target || col.kind == ColumnKind::text) {
      throw ConfigError("multi-task target '" + name + "' must be a numeric or categorical target column");
    }
    if (col.kind == ColumnKind::numeric) {
      if (!stats.numeric_stats.contains(name)) throw ConfigError("no statistics for numeric target '" + name + "'");
      numeric_head_names_.push_back(name);
      numeric_heads_.push_back(nn::Linear::create(params_, "head.numeric." + name, d_model_, 1, rng));
    } else {
      const auto it = stats.category_maps.find(name);
      if (it == stats.category_maps.end()) throw ConfigError("no category map for target '" + name + "'");
      categorical_head_names_.push_back(name);
      categorical_heads_.push_back(
          nn::Linear::create(params_, "head.categorical." + name, d_model_, it->second.size(), rng));
    }
  }
}

ExampleTable TtitaModel::make_examples(const Dataset& preprocessed) const {
  ExampleTable ex;
  ex.features = featurize(preprocessed, hp_.hash());
  const auto& text = preprocessed.column(schema_.text_target()).strings;
  ex.targets.reserve(text.size());
  for (const auto& t : text) {
    if (t) {
      ex.targets.emplace_back(encode_sequence(*t, vocab_, hp_.max_len));
    } else {
      ex.targets.emplace_back(std::nullopt);
    }
  }
  for (const auto& name : numeric_head_names_) {
    std::vector<std::optional<real>> col;
    for (const auto& v : preprocessed.column(name).numbers) {
      col.push_back(v ? std::optional<real>(static_cast<real>(*v)) : std::nullopt);
    }
    ex.numeric_targets.push_back(std::move(col));
  }
  for (const auto& name : categorical_head_names_) {
    const auto& map = stats_.category_maps.at(name);
    std::vector<int> col;
    for (const auto& v : preprocessed.column(name).strings) {
      const auto idx = map.index_of(v);
      col.push_back(v && idx != 0 ? static_cast<int>(idx) : -1);
    }
    ex.categorical_targets.push_back(std::move(col));
  }
  return ex;
}

Tensor TtitaModel::context(const FeatureTable& features, std::span<const std::size_t> rows) const {
  if (!encoder_) return {};
  return encoder_->build_context(features, rows);
}

std::pair<TokenBatch, std::vector<int>> TtitaModel::teacher_forcing(const ExampleTable& examples,
                                                                      std::span<const std::size_t> rows) {
  TokenBatch tb;
  tb.batch = rows.size();
  for (auto r : rows) {
    if (!examples.targets.at(r)) throw ConfigError("teacher_forcing: row " + std::to_string(r) + " has no target");
    tb.seq_len = std::max(tb.seq_len, examples.targets[r]->size() - 1);
  }
  tb.ids.assign(tb.batch * tb.seq_len, Vocab::kPad);
  std::vector<int> targets(tb.batch * tb.seq_len, -1);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const auto& seq = *examples.targets[rows[b]];
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
      tb.ids[b * tb.seq_len + t] = seq[t];
      targets[b * tb.seq_len + t] = seq[t + 1];
    }
  }
  return {std::move(tb), std::move(targets)};
}

LossBreakdown TtitaModel::loss(const ExampleTable& examples, std::span<const std::size_t> rows, bool training, Rng& rng,
                               DecoderProbe* probe) const {
  if (rows.empty()) throw ConfigError("loss: empty batch");
  LossBreakdown out;
  const Tensor ctx = context(examples.features, rows);
  auto [tokens, targets] = teacher_forcing(examples, rows);
  const Tensor logits = decoder_->forward(tokens, ctx, training, rng, probe);
  Tensor total = ops::cross_entropy(logits, targets);
  out.text = total.item();
  out.text_tokens = static_cast<std::size_t>(std::count_if(targets.begin(), targets.end(), [](int t) { return t >= 0; }));

  for (std::size_t h = 0; h < numeric_heads_.size(); ++h) {
    std::vector<std::size_t> keep;
    std::vector<real> y;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (const auto& v = examples.numeric_targets[h][rows[i]]) {
        keep.push_back(i);
        y.push_back(*v);
      }
    }
    out.numeric_count.push_back(keep.size());
    if (keep.empty()) {
      out.numeric.push_back(0.0);
      continue;
    }
    const Tensor l = mse_loss(numeric_heads_[h](ops::gather_rows(ctx, keep)), y);
    out.numeric.push_back(l.item());
    total = ops::add(total, l);
  }
  for (std::size_t h = 0; h < categorical_heads_.size(); ++h) {
    std::vector<int> y(rows.size());
    std::size_t counted = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      y[i] = examples.categorical_targets[h][rows[i]];
      counted += y[i] >= 0;
    }
    out.categorical_count.push_back(counted);
    const Tensor l = ops::cross_entropy(categorical_heads_[h](ctx), y);
    out.categorical.push_back(l.item());
    total = ops::add(total, l);
  }
  out.total = total;
  return out;
}

std::vector<std::vector<int>> TtitaModel::generate(const FeatureTable& features,
                                                   std::span<const std::size_t> rows) const {
  NoGradGuard guard;
  if (rows.empty()) return {};
  if (!encoder_) {
    // Unconditional: one decode serves every row.
    const auto one = decoder_->generate({}, 1, hp_.max_len);
    return std::vector<std::vector<int>>(rows.size(), one.front());
  }
  return decoder_->generate(context(features, rows), rows.size(), hp_.max_len);
}

std::vector<std::vector<double>> TtitaModel::predict_numeric(const FeatureTable& features,
                                                             std::span<const std::size_t> rows) const {
  NoGradGuard guard;
  std::vector<std::vector<double>> out;
  if (numeric_heads_.empty() || rows.empty()) return std::vector<std::vector<double>>(numeric_heads_.size());
  const Tensor ctx = context(features, rows);
  for (const auto& head : numeric_heads_) {
    const Tensor y = head(ctx);
    out.emplace_back(y.data().begin(), y.data().end());
  }
  return out;
}

std::vector<std::vector<std::size_t>> TtitaModel::predict_categorical(const FeatureTable& features,
                                                                      std::span<const std::size_t> rows) const {
  NoGradGuard guard;
  std::vector<std::vector<std::size_t>> out;
  if (categorical_heads_.empty() || rows.empty()) return std::vector<std::vector<std::size_t>>(categorical_heads_.size());
  const Tensor ctx = context(features, rows);
  for (const auto& head : categorical_heads_) {
    const Tensor logits = head(ctx);
    const std::size_t c = logits.cols();
    std::vector<std::size_t> pred;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const real* row = logits.data().data() + r * c;
      std::size_t best = c > 1 ? 1 : 0;
      for (std::size_t k = best + 1; k < c; ++k)
        if (row[k] > row[best]) best = k;
      pred.push_back(best);
    }
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace ttita
