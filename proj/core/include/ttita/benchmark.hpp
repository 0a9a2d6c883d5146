#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ttita/dataset.hpp"
#include "ttita/metrics.hpp"
#include "ttita/model.hpp"
#include "ttita/trainer.hpp"

namespace ttita {

/// Known method names: mode, knn, decoder, ttita, ttita-mtl.
const std::vector<std::string>& benchmark_methods();
/// Splits a comma-separated list and validates every name.
std::vector<std::string> parse_methods(std::string_view list);

struct MethodResult {
  std::string method;
  metrics::ScoreReport scores;
  double train_seconds = 0;
  double inference_seconds = 0;
};

struct BenchmarkReport {
  std::size_t train_rows = 0, valid_rows = 0, test_rows = 0;
  std::vector<MethodResult> rows;

  nlohmann::json to_json() const;
  /// Fixed-width table, one line per method.
  std::string table() const;
};

struct BenchmarkOptions {
  std::vector<std::string> methods;
  /// Seed of the 81/9/10 split; training uses the hyperparameter seed.
  std::uint64_t split_seed = 0;
  TrainOptions train;
};

/// Runs every method on the same split and scores generated text against
/// the test rows that have a text target. ttita-mtl adds heads for
/// hp.mtl_targets, or every auxiliary target of the schema when empty.
BenchmarkReport run_benchmark(const Dataset& raw, const Hyperparameters& hp, const BenchmarkOptions& options);

}  // namespace ttita
