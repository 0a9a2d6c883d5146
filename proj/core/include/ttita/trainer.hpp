#pragma once

#include <functional>
#include <vector>

#include "json.hpp"
#include "ttita/checkpoint.hpp"
#include "ttita/model.hpp"

namespace ttita {

/// Loss components averaged over a whole split (text over all target
/// tokens, each head over its labelled rows), and their unweighted sum.
struct LossSummary {
  double total = 0;
  double text = 0;
  double mse = 0;
  double categorical = 0;
  std::size_t text_tokens = 0;

  nlohmann::json to_json() const;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  LossSummary train;
  LossSummary valid;
  bool selected_by_valid = true;
};

struct TrainResult {
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
  double best_loss = 0;

  nlohmann::json to_json() const;
};

struct TrainOptions {
  /// Called after every epoch.
  std::function<void(const EpochLog&)> on_epoch;
};

/// Accumulates per-batch breakdowns into a split-level summary.
class LossAccumulator {
 public:
  void add(const LossBreakdown& b);
  LossSummary summary() const;

 private:
  double text_sum_ = 0;
  std::size_t tokens_ = 0;
  std::vector<double> numeric_sum_, categorical_sum_;
  std::vector<std::size_t> numeric_n_, categorical_n_;
};

/// Evaluation-mode loss over every supervised row, in batches.
LossSummary evaluate_loss(const TtitaModel& model, const ExampleTable& examples, std::size_t batch_size);

/// Adam over shuffled mini-batches of the supervised training rows for
/// `epochs` epochs; after each epoch the validation total loss is measured
/// and the weights of the best epoch are restored at the end. With no
/// supervised validation rows, the epoch's training loss selects instead.
TrainResult train(TtitaModel& model, const ExampleTable& train, const ExampleTable& valid,
                  const TrainOptions& options = {});

/// Fits statistics and vocabulary on `train_raw`, builds a model from `hp`,
/// trains it and packages the best weights.
struct FitResult {
  Checkpoint checkpoint;
  TrainResult result;
};
FitResult fit(const Dataset& train_raw, const Dataset& valid_raw, const Hyperparameters& hp,
              const TrainOptions& options = {});

}  // namespace ttita
