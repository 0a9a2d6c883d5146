#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ttita::metrics {

using Tokens = std::vector<std::string>;

/// Unigram ROUGE F1 with clipped overlap; 0 when either side is empty.
double rouge1_f1(std::span<const std::string> truth, std::span<const std::string> imputed);

/// Unigram BLEU: clipped precision times the brevity penalty
/// exp(1 - |G|/|I|) when the imputation is shorter; 0 when it is empty.
double bleu1(std::span<const std::string> truth, std::span<const std::string> imputed);

/// METEOR with exact matching only: Fmean = 10PR/(R+9P) times
/// (1 - 0.5 (chunks/matches)^3). Alignment pairs each imputed token, left to
/// right, with the earliest unused equal truth token.
double meteor(std::span<const std::string> truth, std::span<const std::string> imputed);

struct ScoreReport {
  double meteor = 0;
  double rouge1_f1 = 0;
  double bleu1 = 0;
  std::size_t n_pairs = 0;

  /// {meteor, rouge, bleu, n_pairs}
  nlohmann::json to_json() const;
};

using Pair = std::pair<Tokens, Tokens>;  // (truth, imputed)
using Metric = double (*)(std::span<const std::string>, std::span<const std::string>);

/// Arithmetic mean of `metric` over pairs. Throws on an empty list.
double corpus_average(std::span<const Pair> pairs, Metric metric);

/// All three averages, tokenizing raw strings with the pipeline tokenizer.
ScoreReport score(std::span<const std::string> truth, std::span<const std::string> imputed);

}  // namespace ttita::metrics
