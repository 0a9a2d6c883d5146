#include "ttita/trainer.hpp"

#include <algorithm>
#include <limits>

#include "ttita/adam.hpp"
#include "ttita/error.hpp"

namespace ttita {

nlohmann::json LossSummary::to_json() const {
  return {{"total", total}, {"text", text}, {"mse", mse}, {"categorical", categorical}, {"text_tokens", text_tokens}};
}

nlohmann::json TrainResult::to_json() const {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : history) {
    epochs.push_back({{"epoch", e.epoch}, {"train", e.train.to_json()}, {"valid", e.valid.to_json()}});
  }
  return {{"epochs", epochs}, {"best_epoch", best_epoch}, {"best_loss", best_loss}};
}

void LossAccumulator::add(const LossBreakdown& b) {
  text_sum_ += b.text * static_cast<double>(b.text_tokens);
  tokens_ += b.text_tokens;
  numeric_sum_.resize(b.numeric.size(), 0.0);
  numeric_n_.resize(b.numeric.size(), 0);
  categorical_sum_.resize(b.categorical.size(), 0.0);
  categorical_n_.resize(b.categorical.size(), 0);
  for (std::size_t h = 0; h < b.numeric.size(); ++h) {
    numeric_sum_[h] += b.numeric[h] * static_cast<double>(b.numeric_count[h]);
    numeric_n_[h] += b.numeric_count[h];
  }
  for (std::size_t h = 0; h < b.categorical.size(); ++h) {
    categorical_sum_[h] += b.categorical[h] * static_cast<double>(b.categorical_count[h]);
    categorical_n_[h] += b.categorical_count[h];
  }
}

LossSummary LossAccumulator::summary() const {
  LossSummary s;
  s.text_tokens = tokens_;
  s.text = tokens_ ? text_sum_ / static_cast<double>(tokens_) : 0.0;
  for (std::size_t h = 0; h < numeric_sum_.size(); ++h)
    if (numeric_n_[h]) s.mse += numeric_sum_[h] / static_cast<double>(numeric_n_[h]);
  for (std::size_t h = 0; h < categorical_sum_.size(); ++h)
    if (categorical_n_[h]) s.categorical += categorical_sum_[h] / static_cast<double>(categorical_n_[h]);
  s.total = s.text + s.mse + s.categorical;
  return s;
}

LossSummary evaluate_loss(const TtitaModel& model, const ExampleTable& examples, std::size_t batch_size) {
  NoGradGuard guard;
  const auto rows = examples.supervised_rows();
  LossAccumulator acc;
  Rng unused(0);
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::size_t end = std::min(rows.size(), start + batch_size);
    acc.add(model.loss(examples, std::span(rows).subspan(start, end - start), /*training=*/false, unused));
  }
  return acc.summary();
}

TrainResult train(TtitaModel& model, const ExampleTable& train_set, const ExampleTable& valid_set,
                  const TrainOptions& options) {
  const auto& hp = model.hyperparameters();
  if (hp.batch_size == 0) throw ConfigError("batch size must be positive");
  auto rows = train_set.supervised_rows();
  if (rows.empty()) throw ConfigError("training set has no rows with a target value");
  const bool use_valid = !valid_set.supervised_rows().empty();

  Rng root(hp.seed);
  Rng shuffle_rng = root.fork(1);
  Rng dropout_rng = root.fork(2);
  AdamState adam;
  adam.learning_rate = hp.learning_rate;
  auto params = model.parameters().tensors();

  TrainResult result;
  result.best_loss = std::numeric_limits<double>::infinity();
  std::vector<std::vector<real>> best;
  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(rows));
    LossAccumulator acc;
    for (std::size_t start = 0; start < rows.size(); start += hp.batch_size) {
      const std::size_t end = std::min(rows.size(), start + hp.batch_size);
      auto batch = model.loss(train_set, std::span(rows).subspan(start, end - start), /*training=*/true, dropout_rng);
      acc.add(batch);
      model.parameters().ensure_grad();
      batch.total.backward();
      adam_step(params, adam);
    }
    EpochLog log;
    log.epoch = epoch;
    log.train = acc.summary();
    log.selected_by_valid = use_valid;
    if (use_valid) log.valid = evaluate_loss(model, valid_set, hp.batch_size);
    const double score = use_valid ? log.valid.total : log.train.total;
    if (score < result.best_loss) {
      result.best_loss = score;
      result.best_epoch = epoch;
      best = model.parameters().snapshot();
    }
    result.history.push_back(log);
    if (options.on_epoch) options.on_epoch(log);
  }
  if (!best.empty()) model.parameters().restore(best);
  return result;
}

FitResult fit(const Dataset& train_raw, const Dataset& valid_raw, const Hyperparameters& hp, const TrainOptions& options) {
  if (train_raw.rows() == 0) throw ConfigError("training set is empty");
  const auto stats = fit_preprocessing(train_raw);
  const auto train_ds = preprocess(train_raw, stats);
  const auto valid_ds = preprocess(valid_raw, stats);
  std::vector<std::string> texts;
  for (const auto& t : train_ds.column(train_ds.schema().text_target()).strings)
    if (t) texts.push_back(*t);
  const auto vocab = Vocab::build(texts, hp.vocab_cap);
  TtitaModel model(train_raw.schema(), stats, vocab, hp);
  const auto train_ex = model.make_examples(train_ds);
  const auto valid_ex = model.make_examples(valid_ds);
  auto result = train(model, train_ex, valid_ex, options);
  auto checkpoint = Checkpoint::from_model(model, result.to_json());
  return {std::move(checkpoint), std::move(result)};
}

}  // namespace ttita
