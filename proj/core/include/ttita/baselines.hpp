#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttita/dataset.hpp"
#include "ttita/hashing.hpp"
#include "ttita/trainer.hpp"

namespace ttita::baselines {

/// Most frequent non-missing raw target string; ties go to the
/// lexicographically smallest. Throws when there is no target at all.
std::string mode_impute(std::span<const std::optional<std::string>> train_targets);

/// Exhaustive 1-nearest-neighbour index over concatenated row features:
/// z-scored numerics, one-hot categoricals, hashed text blocks.
class KnnIndex {
 public:
  /// Rows of `train` (filled + standardized) with a present text target.
  static KnnIndex build(const Dataset& train, const HashConfig& hash);

  std::size_t size() const { return targets_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::string>& targets() const { return targets_; }
  std::span<const double> row(std::size_t i) const { return {matrix_.data() + i * dimension_, dimension_}; }

  /// Feature vector of `row` of a filled + standardized dataset.
  std::vector<double> features(const Dataset& data, std::size_t row) const;

  /// Position of the Euclidean-nearest stored row; ties -> lowest position.
  std::size_t nearest(std::span<const double> query) const;
  std::string impute(std::span<const double> query) const;
  std::string impute(const Dataset& data, std::size_t row) const { return impute(features(data, row)); }

 private:
  std::size_t dimension_ = 0;
  std::vector<double> matrix_;
  std::vector<std::string> targets_;
  Schema schema_;
  Preprocessing stats_;
  HashConfig hash_;
};

/// Trains the decoder alone on the target column (no context vector, no
/// cross-attention), with the same pipeline and hyperparameters otherwise.
FitResult decoder_only_train(const Dataset& train_raw, const Dataset& valid_raw, Hyperparameters hp,
                             const TrainOptions& options = {});

}  // namespace ttita::baselines
