// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run all ten
//   acceptance --only 4   run one

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "reference_baselines.hpp"
#include "reference_metrics.hpp"
#include "suites.hpp"
#include "ttita/baselines.hpp"
#include "ttita/benchmark.hpp"
#include "ttita/checkpoint.hpp"
#include "ttita/imputer.hpp"
#include "ttita/metrics.hpp"
#include "ttita/synthetic.hpp"
#include "ttita/trainer.hpp"

namespace {

using namespace ttita;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Dataset toy_dataset(std::size_t rows, std::uint64_t seed) {
  const auto t = synthetic::toy(rows, seed);
  return from_table(t.csv, t.schema);
}

// 1 ---------------------------------------------------------------------

Outcome gradient_correctness() {
  // The 64-bit oracle lives in its own binary built against the double core.
  const std::string cmd = std::string("\"") + TTITA_GRADCHECK_BIN + "\" 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {false, "could not launch " TTITA_GRADCHECK_BIN};
  std::string text;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe)) text += buf;
  const int status = pclose(pipe);
  while (!text.empty() && text.back() == '\n') text.pop_back();
  std::replace(text.begin(), text.end(), '\n', ';');
  return {status == 0, text};
}

// 2 ---------------------------------------------------------------------

DecoderConfig random_config(Rng& rng) {
  DecoderConfig c;
  c.d_model = 4 * (2 + rng.below(5));
  c.vocab_size = 8 + rng.below(20);
  c.num_layers = 1 + rng.below(3);
  c.num_heads = 1 + rng.below(4);
  c.ffn_hidden = 8 + rng.below(32);
  c.memory_chunks = rng.below(2) == 0 ? 1 : 2;
  return c;
}

Outcome causality() {
  double worst = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(1000 + trial);
    const DecoderConfig cfg = random_config(rng);
    nn::ParameterSet params;
    const Decoder dec(cfg, params, rng);
    const std::size_t batch = 1 + rng.below(3), len = 3 + rng.below(8);
    TokenBatch tokens{batch, len, std::vector<int>(batch * len)};
    for (auto& id : tokens.ids) id = static_cast<int>(rng.below(cfg.vocab_size));
    const Tensor ctx = support::random_tensor({batch, cfg.d_model}, rng);
    const Tensor before = dec.forward(tokens, ctx, false, rng);
    const std::size_t t = rng.below(len - 1);
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t p = t + 1; p < len; ++p) tokens.ids[r * len + p] = static_cast<int>(rng.below(cfg.vocab_size));
    const Tensor after = dec.forward(tokens, ctx, false, rng);
    const std::size_t v = cfg.vocab_size;
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t p = 0; p <= t; ++p)
        for (std::size_t k = 0; k < v; ++k) {
          const std::size_t i = (r * len + p) * v + k;
          worst = std::max(worst, std::abs(double(before.at(i)) - double(after.at(i))));
        }
  }
  return {worst < 1e-6, fmt("max change at positions <= t over 20 models: %.3g (limit 1e-6)", worst)};
}

// 3 ---------------------------------------------------------------------

Outcome cross_attention_degenerate() {
  const Dataset raw = toy_dataset(16, 3);
  const auto stats = fit_preprocessing(raw);
  std::vector<std::string> texts;
  for (const auto& s : raw.column("summary").strings) texts.push_back(*s);
  Hyperparameters hp;
  hp.num_layers = 6;
  const TtitaModel model(raw.schema(), stats, Vocab::build(texts), hp);
  const auto ex = model.make_examples(preprocess(raw, stats));
  std::size_t checked = 0, off = 0;
  for (const bool training : {false, true}) {
    Rng rng(9);
    DecoderProbe probe;
    model.loss(ex, ex.supervised_rows(), training, rng, &probe);
    for (const auto& w : probe.cross_attention) {
      if (w.keys != 1) return {false, fmt("memory has %zu keys, expected 1", w.keys)};
      for (real p : w.values) {
        ++checked;
        off += (p != real(1));
      }
    }
  }
  return {off == 0 && checked > 0,
          fmt("%zu weights across 6 layers, %zu heads, train and eval mode; %zu differ from 1.0", checked,
              model.decoder().heads(), off)};
}

// 4 ---------------------------------------------------------------------

/// Share of non-padding target tokens whose teacher-forced argmax is right.
double teacher_forced_accuracy(const TtitaModel& model, const ExampleTable& ex) {
  const auto rows = ex.supervised_rows();
  const auto [tokens, targets] = TtitaModel::teacher_forcing(ex, rows);
  Rng rng(0);
  const Tensor logits = model.decoder().forward(tokens, model.context(ex.features, rows), false, rng);
  const std::size_t v = logits.dim(1);
  std::size_t hit = 0, total = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0) continue;
    const auto row = logits.data().subspan(i * v, v);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    hit += (best == targets[i]);
    ++total;
  }
  return double(hit) / double(total);
}

Outcome overfit() {
  const auto t0 = Clock::now();
  const auto data = synthetic::toy(32, 0);
  const Dataset raw = from_table(data.csv, data.schema);
  Hyperparameters hp;  // defaults
  hp.epochs = 200;
  const auto fitted = fit(raw, raw, hp);
  const TtitaModel model = fitted.checkpoint.instantiate();
  const auto ex = model.make_examples(preprocess(raw, model.preprocessing()));
  const double acc = teacher_forced_accuracy(model, ex);
  const auto generated = generate_text(model, raw);
  std::size_t exact = 0;
  const auto& truth = raw.column("summary").strings;
  for (std::size_t r = 0; r < raw.rows(); ++r) exact += (generated[r] == join_tokens(tokenize(*truth[r])));
  const double secs = seconds_since(t0);
  return {acc >= 0.99 && exact >= 30 && secs < 300,
          fmt("token accuracy %.4f (>= 0.99), exact %zu/32 (>= 30), %.1fs (< 300s)", acc, exact, secs)};
}

// 5 ---------------------------------------------------------------------

Outcome metric_oracles() {
  const support::Words g{"great", "gift", "!"}, i{"great", "gift"};
  const double r = metrics::rouge1_f1(g, i), b = metrics::bleu1(g, i), m = metrics::meteor(g, i);
  const double m_hand = 20.0 / 29.0 * (1 - 0.5 * std::pow(0.5, 3));
  const bool triple = std::abs(r - 0.8) < 1e-12 && std::abs(b - std::exp(-0.5)) < 1e-12 && std::abs(m - m_hand) < 1e-12 &&
                      std::abs(m - 0.6466) < 5e-5;
  Rng rng(2024);
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    const auto a = support::random_words(rng, 10), c = support::random_words(rng, 10);
    worst = std::max({worst, std::abs(metrics::rouge1_f1(a, c) - support::ref_rouge(a, c)),
                      std::abs(metrics::bleu1(a, c) - support::ref_bleu(a, c)),
                      std::abs(metrics::meteor(a, c) - support::ref_meteor(a, c))});
  }
  return {triple && worst < 1e-9,
          fmt("hand triple ROUGE %.6f BLEU %.6f METEOR %.6f; max oracle gap over 100 pairs %.3g (limit 1e-9)", r, b, m,
              worst)};
}

// 6 ---------------------------------------------------------------------

Outcome loss_identities() {
  const Dataset raw = toy_dataset(32, 6);
  const auto stats = fit_preprocessing(raw);
  std::vector<std::string> texts;
  for (const auto& s : raw.column("summary").strings) texts.push_back(*s);
  const Vocab vocab = Vocab::build(texts);
  Hyperparameters hp;
  hp.num_layers = 2;
  hp.mtl_targets = {"score", "tier"};
  TtitaModel model(raw.schema(), stats, vocab, hp);
  const auto ex = model.make_examples(preprocess(raw, stats));
  const auto rows = ex.supervised_rows();
  Rng rng(1);

  // Sum identity, against the breakdown and against a double re-derivation.
  const auto b = model.loss(ex, rows, false, rng);
  const double total = b.total.item();
  const double sum = b.text + b.numeric[0] + b.categorical[0];
  const auto o = support::independent_components(model, ex, rows);
  const double gap_sum = std::abs(total - sum);
  const double gap_oracle = std::abs(total - (o.mse + o.categorical + o.text));

  // Padding: per-row token NLL sums do not depend on the batch's padding.
  std::size_t shortest = rows[0], longest = rows[0];
  for (const auto r : rows) {
    if (ex.targets[r]->size() < ex.targets[shortest]->size()) shortest = r;
    if (ex.targets[r]->size() > ex.targets[longest]->size()) longest = r;
  }
  const std::vector<std::size_t> alone{shortest}, other{longest}, both{shortest, longest};
  const auto la = model.loss(ex, alone, false, rng), lb = model.loss(ex, other, false, rng),
             lab = model.loss(ex, both, false, rng);
  const double gap_pad =
      std::abs(lab.text * double(lab.text_tokens) - (la.text * double(la.text_tokens) + lb.text * double(lb.text_tokens)));

  // Uniform prediction: zero the classifiers.
  for (const auto& [name, t] : model.parameters().entries())
    if (name.starts_with("decoder.classifier") || name.starts_with("head.categorical")) {
      Tensor w = t;
      std::fill(w.mutable_data().begin(), w.mutable_data().end(), real(0));
    }
  const auto u = model.loss(ex, rows, false, rng);
  const double gap_text = std::abs(u.text - std::log(double(vocab.size())));
  const double gap_cat = std::abs(u.categorical[0] - std::log(double(stats.category_maps.at("tier").size())));

  const bool pass = gap_sum < 1e-6 && gap_oracle < 1e-6 && gap_pad < 1e-5 && gap_text < 1e-6 && gap_cat < 1e-6;
  return {pass, fmt("total vs components %.2g, vs independent %.2g (1e-6); padding %.2g; uniform text %.2g, "
                    "categorical %.2g (1e-6)",
                    gap_sum, gap_oracle, gap_pad, gap_text, gap_cat)};
}

// 7 ---------------------------------------------------------------------

Outcome baseline_exactness() {
  Rng rng(77);
  std::size_t mode_ok = 0, mode_n = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::optional<std::string>> v(1000);
    const std::size_t levels = 2 + rng.below(30);
    for (auto& x : v)
      if (rng.below(10) != 0) x = "s" + std::to_string(rng.below(levels));
    ++mode_n;
    mode_ok += baselines::mode_impute(v) == support::ref_mode(v);
  }

  // Numeric and categorical inputs, with features re-derived here.
  const Schema schema({{"a", ColumnKind::numeric, ColumnRole::input},
                       {"b", ColumnKind::numeric, ColumnRole::input},
                       {"c", ColumnKind::categorical, ColumnRole::input},
                       {"y", ColumnKind::text, ColumnRole::target}});
  auto random_row = [&](std::size_t i) {
    auto num = [&] { return rng.below(8) == 0 ? std::string() : std::to_string(rng.uniform(-3, 3)); };
    return std::vector<std::string>{num(), num(), rng.below(8) == 0 ? "" : std::string(1, char('p' + rng.below(5))),
                                    "target " + std::to_string(i)};
  };
  std::vector<std::vector<std::string>> train_rows, query_rows;
  for (std::size_t i = 0; i < 1000; ++i) train_rows.push_back(random_row(i));
  for (std::size_t i = 0; i < 1000; ++i) query_rows.push_back(random_row(i));
  const Dataset train_raw = support::make_dataset(schema, train_rows);
  const Dataset query_raw = support::make_dataset(schema, query_rows);
  const auto stats = fit_preprocessing(train_raw);
  const auto index = baselines::KnnIndex::build(preprocess(train_raw, stats), HashConfig{});
  const Dataset query = preprocess(query_raw, stats);

  // Oracle features: mean fill, population z-score, one-hot over sorted levels.
  auto column_stats = [&](std::size_t col) {
    double s = 0, n = 0;
    for (const auto& r : train_rows)
      if (!r[col].empty()) s += std::stod(r[col]), ++n;
    const double mean = s / n;
    double ss = 0;
    for (const auto& r : train_rows)
      if (!r[col].empty()) ss += (std::stod(r[col]) - mean) * (std::stod(r[col]) - mean);
    return std::pair{mean, std::sqrt(ss / n)};
  };
  const auto sa = column_stats(0), sb = column_stats(1);
  std::vector<std::string> levels{""};
  for (const auto& r : train_rows)
    if (!r[2].empty() && std::find(levels.begin(), levels.end(), r[2]) == levels.end()) levels.push_back(r[2]);
  std::sort(levels.begin() + 1, levels.end());
  auto features = [&](const std::vector<std::string>& r) {
    auto z = [](const std::string& cell, std::pair<double, double> s) {
      const double x = cell.empty() ? s.first : std::stod(cell);
      return (x - s.first) / s.second;
    };
    std::vector<double> f{z(r[0], sa), z(r[1], sb)};
    for (const auto& l : levels) f.push_back(r[2] == l ? 1.0 : 0.0);
    return f;
  };
  std::vector<std::vector<double>> stored;
  for (const auto& r : train_rows) stored.push_back(features(r));

  std::size_t knn_ok = 0;
  for (std::size_t q = 0; q < query_rows.size(); ++q) {
    const auto expect = train_rows[support::ref_nearest(stored, features(query_rows[q]))][3];
    knn_ok += index.impute(query, q) == expect;
  }
  return {mode_ok == mode_n && knn_ok == query_rows.size(),
          fmt("mode %zu/%zu tables, knn %zu/%zu queries on a 1000-row index", mode_ok, mode_n, knn_ok,
              query_rows.size())};
}

// 8 ---------------------------------------------------------------------

Outcome determinism() {
  const Dataset raw = toy_dataset(32, 8);
  Hyperparameters hp;
  hp.num_layers = 2;
  hp.epochs = 3;
  hp.batch_size = 8;
  hp.seed = 7;
  hp.mtl_targets = {"score", "tier"};
  const auto a = fit(raw, raw, hp).checkpoint;
  const std::string bytes = a.serialize();
  const bool same = fit(raw, raw, hp).checkpoint.serialize() == bytes;

  const auto path = std::filesystem::temp_directory_path() / "ttita_acceptance_8.ckpt";
  a.save(path);
  const auto loaded = Checkpoint::load(path);
  std::filesystem::remove(path);
  const auto before = impute(a.instantiate(), raw);
  const auto after = impute(loaded.instantiate(), raw);
  bool equal = before.size() == after.size();
  for (std::size_t c = 0; equal && c < before.size(); ++c) equal = before[c].values == after[c].values;
  return {same && equal && loaded.serialize() == bytes,
          fmt("two seed-7 runs byte-identical: %s (%zu bytes); impute after save/load identical: %s",
              same ? "yes" : "no", bytes.size(), equal ? "yes" : "no")};
}

// 9 ---------------------------------------------------------------------

Outcome desk_benchmark() {
  const auto t0 = Clock::now();
  const auto data = synthetic::reviews(5000, 9);
  const Dataset raw = from_table(data.csv, data.schema);
  Hyperparameters hp;  // defaults
  BenchmarkOptions opts;
  opts.methods = {"mode", "ttita"};
  const auto report = run_benchmark(raw, hp, opts);
  const auto& mode = report.rows[0].scores;
  const auto& ttita = report.rows[1].scores;
  const double secs = seconds_since(t0);
  return {ttita.rouge1_f1 >= mode.rouge1_f1 && ttita.bleu1 >= mode.bleu1 && secs < 1800,
          fmt("%zu test rows; ROUGE ttita %.4f vs mode %.4f, BLEU ttita %.4f vs mode %.4f, METEOR %.4f vs %.4f; "
              "%.0fs (< 1800s)",
              report.test_rows, ttita.rouge1_f1, mode.rouge1_f1, ttita.bleu1, mode.bleu1, ttita.meteor, mode.meteor,
              secs)};
}

// 10 --------------------------------------------------------------------

Outcome mtl_plumbing() {
  const auto data = synthetic::toy(32, 0);
  const Dataset raw = from_table(data.csv, data.schema);
  // Defaults except the batch: 128 would make each epoch a single step on 32 rows.
  Hyperparameters hp;
  hp.epochs = 3;
  hp.batch_size = 8;
  hp.mtl_targets = {"score", "tier"};
  std::vector<EpochLog> logs;
  TrainOptions opts;
  opts.on_epoch = [&](const EpochLog& e) { logs.push_back(e); };
  const auto fitted = fit(raw, raw, hp, opts);
  bool falling = logs.size() == 3;
  std::string trace;
  for (std::size_t e = 0; e < logs.size(); ++e) {
    const auto& v = logs[e].valid;
    const auto& t = logs[e].train;
    trace += fmt(" e%zu eval text %.3f mse %.3f cat %.3f, train text %.3f mse %.3f cat %.3f;", e + 1, v.text, v.mse,
                 v.categorical, t.text, t.mse, t.categorical);
    if (e > 0) {
      for (const auto* pair : {&logs[e - 1].valid, &logs[e - 1].train}) {
        const auto& now = pair == &logs[e - 1].valid ? v : t;
        falling = falling && now.text < pair->text && now.mse < pair->mse && now.categorical < pair->categorical;
      }
    }
  }
  const auto cols = impute(fitted.checkpoint.instantiate(), raw);
  std::string names;
  for (const auto& c : cols) names += (names.empty() ? "" : ",") + c.name;
  const bool three = cols.size() == 3 && cols[1].name == "score" && cols[2].name == "tier";
  return {falling && three, "losses" + trace + " impute columns " + names};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance checks");
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{
      gradient_correctness, causality,          cross_attention_degenerate, overfit,      metric_oracles,
      loss_identities,      baseline_exactness, determinism,                desk_benchmark, mtl_plumbing};
  int failures = 0;
  for (int n = 1; n <= 10; ++n) {
    if (only != 0 && n != only) continue;
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
