#include "ttita/metrics.hpp"

#include <cmath>
#include <map>

#include "ttita/error.hpp"
#include "ttita/text.hpp"

namespace ttita::metrics {

namespace {

std::size_t clipped_overlap(std::span<const std::string> a, std::span<const std::string> b) {
  std::map<std::string_view, std::size_t> counts;
  for (const auto& t : a) ++counts[t];
  std::size_t overlap = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return overlap;
}

}  // namespace

double rouge1_f1(std::span<const std::string> truth, std::span<const std::string> imputed) {
  if (truth.empty() || imputed.empty()) return 0.0;
  const auto o = static_cast<double>(clipped_overlap(truth, imputed));
  if (o == 0) return 0.0;
  const double p = o / static_cast<double>(imputed.size());
  const double r = o / static_cast<double>(truth.size());
  return 2 * p * r / (p + r);
}

double bleu1(std::span<const std::string> truth, std::span<const std::string> imputed) {
  if (imputed.empty()) return 0.0;
  const double p = static_cast<double>(clipped_overlap(truth, imputed)) / static_cast<double>(imputed.size());
  const double bp = imputed.size() >= truth.size()
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(truth.size()) / static_cast<double>(imputed.size()));
  return bp * p;
}

double meteor(std::span<const std::string> truth, std::span<const std::string> imputed) {
  std::vector<bool> used(truth.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> alignment;  // (imputed pos, truth pos)
  for (std::size_t i = 0; i < imputed.size(); ++i) {
    for (std::size_t g = 0; g < truth.size(); ++g) {
      if (!used[g] && truth[g] == imputed[i]) {
        used[g] = true;
        alignment.emplace_back(i, g);
        break;
      }
    }
  }
  const std::size_t m = alignment.size();
  if (m == 0) return 0.0;
  std::size_t chunks = 1;
  for (std::size_t k = 1; k < m; ++k) {
    const bool adjacent = alignment[k].first == alignment[k - 1].first + 1 && alignment[k].second == alignment[k - 1].second + 1;
    if (!adjacent) ++chunks;
  }
  const double p = static_cast<double>(m) / static_cast<double>(imputed.size());
  const double r = static_cast<double>(m) / static_cast<double>(truth.size());
  const double f_mean = 10 * p * r / (r + 9 * p);
  const double frag = static_cast<double>(chunks) / static_cast<double>(m);
  return f_mean * (1.0 - 0.5 * frag * frag * frag);
}

nlohmann::json ScoreReport::to_json() const {
  return {{"meteor", meteor}, {"rouge", rouge1_f1}, {"bleu", bleu1}, {"n_pairs", n_pairs}};
}

double corpus_average(std::span<const Pair> pairs, Metric metric) {
  if (pairs.empty()) throw ConfigError("corpus_average: no pairs to score");
  double total = 0;
  for (const auto& [g, i] : pairs) total += metric(g, i);
  return total / static_cast<double>(pairs.size());
}

ScoreReport score(std::span<const std::string> truth, std::span<const std::string> imputed) {
  if (truth.size() != imputed.size()) {
    throw ConfigError("score: " + std::to_string(truth.size()) + " references but " + std::to_string(imputed.size()) +
                      " predictions");
  }
  std::vector<Pair> pairs;
  pairs.reserve(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) pairs.emplace_back(tokenize(truth[k]), tokenize(imputed[k]));
  ScoreReport r;
  r.n_pairs = pairs.size();
  r.meteor = corpus_average(pairs, &meteor);
  r.rouge1_f1 = corpus_average(pairs, &rouge1_f1);
  r.bleu1 = corpus_average(pairs, &bleu1);
  return r;
}

}  // namespace ttita::metrics
