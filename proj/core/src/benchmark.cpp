#include "ttita/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "ttita/baselines.hpp"
#include "ttita/error.hpp"
#include "ttita/imputer.hpp"

namespace ttita {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

const std::vector<std::string>& benchmark_methods() {
  static const std::vector<std::string> names{"mode", "knn", "decoder", "ttita", "ttita-mtl"};
  return names;
}

std::vector<std::string> parse_methods(std::string_view list) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    std::size_t end = list.find(',', pos);
    if (end == std::string_view::npos) end = list.size();
    std::string name(list.substr(pos, end - pos));
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (!name.empty()) {
      const auto& known = benchmark_methods();
      if (std::find(known.begin(), known.end(), name) == known.end())
        throw ConfigError("unknown method '" + name + "' (expected mode, knn, decoder, ttita or ttita-mtl)");
      out.push_back(std::move(name));
    }
    pos = end + 1;
  }
  if (out.empty()) throw ConfigError("no benchmark method given");
  return out;
}

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& r : rows) {
    auto j = r.scores.to_json();
    j["method"] = r.method;
    j["train_seconds"] = r.train_seconds;
    j["inference_seconds"] = r.inference_seconds;
    methods.push_back(std::move(j));
  }
  return {{"split", {{"train", train_rows}, {"valid", valid_rows}, {"test", test_rows}}}, {"methods", methods}};
}

std::string BenchmarkReport::table() const {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s %8s %12s %12s\n", "method", "METEOR", "ROUGE", "BLEU", "n",
                "train_s", "infer_s");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %8.4f %8.4f %8.4f %8zu %12.3f %12.6f\n", r.method.c_str(),
                  r.scores.meteor, r.scores.rouge1_f1, r.scores.bleu1, r.scores.n_pairs, r.train_seconds,
                  r.inference_seconds);
    os << line;
  }
  return os.str();
}

BenchmarkReport run_benchmark(const Dataset& raw, const Hyperparameters& hp, const BenchmarkOptions& options) {
  for (const auto& m : options.methods) parse_methods(m);
  if (options.methods.empty()) throw ConfigError("no benchmark method given");

  const SplitData parts = split(raw, options.split_seed);
  const std::string& target = raw.schema().text_target();

  // Scored rows: test rows with a text target.
  std::vector<std::size_t> scored;
  std::vector<std::string> truth;
  const Column& test_target = parts.test.column(target);
  for (std::size_t r = 0; r < parts.test.rows(); ++r) {
    if (test_target.strings[r]) {
      scored.push_back(r);
      truth.push_back(*test_target.strings[r]);
    }
  }
  if (scored.empty()) throw ConfigError("test split has no row with a text target");
  const Dataset test = parts.test.subset(scored);

  BenchmarkReport report;
  report.train_rows = parts.train.rows();
  report.valid_rows = parts.valid.rows();
  report.test_rows = parts.test.rows();

  for (const auto& method : options.methods) {
    MethodResult res;
    res.method = method;
    std::vector<std::string> imputed;
    if (method == "mode") {
      auto start = Clock::now();
      const std::string value = baselines::mode_impute(parts.train.column(target).strings);
      res.train_seconds = seconds_since(start);
      start = Clock::now();
      imputed.assign(test.rows(), value);
      res.inference_seconds = seconds_since(start);
    } else if (method == "knn") {
      auto start = Clock::now();
      const Preprocessing stats = fit_preprocessing(parts.train);
      const auto index = baselines::KnnIndex::build(preprocess(parts.train, stats), hp.hash());
      res.train_seconds = seconds_since(start);
      start = Clock::now();
      const Dataset q = preprocess(test, stats);
      imputed.reserve(q.rows());
      for (std::size_t r = 0; r < q.rows(); ++r) imputed.push_back(index.impute(q, r));
      res.inference_seconds = seconds_since(start);
    } else {
      Hyperparameters run = hp;
      run.mtl_targets.clear();
      if (method == "ttita-mtl") run.mtl_targets = hp.mtl_targets.empty() ? raw.schema().auxiliary_targets() : hp.mtl_targets;
      auto start = Clock::now();
      FitResult fitted = method == "decoder" ? baselines::decoder_only_train(parts.train, parts.valid, run, options.train)
                                             : fit(parts.train, parts.valid, run, options.train);
      const TtitaModel model = fitted.checkpoint.instantiate();
      res.train_seconds = seconds_since(start);
      start = Clock::now();
      imputed = generate_text(model, test);
      res.inference_seconds = seconds_since(start);
    }
    res.scores = metrics::score(truth, imputed);
    report.rows.push_back(std::move(res));
  }
  return report;
}

}  // namespace ttita
