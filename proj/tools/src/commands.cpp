#include "ttita_cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ttita/benchmark.hpp"
#include "ttita/checkpoint.hpp"
#include "ttita/error.hpp"
#include "ttita/imputer.hpp"
#include "ttita/io.hpp"
#include "ttita/metrics.hpp"
#include "ttita/rng.hpp"
#include "ttita/synthetic.hpp"
#include "ttita/trainer.hpp"

namespace ttita::cli {

namespace fs = std::filesystem;

namespace {

/// A file the user named does not exist; mapped to exit code 2.
class MissingFile : public Error {
 public:
  MissingFile(const std::string& what, const fs::path& path) : Error(what + " not found: " + path.string()) {}
};

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw MissingFile(what, path);
}

/// Hyperparameter flags. Values start from the defaults, a --config file
/// replaces them, and flags given explicitly win over both.
struct HyperFlags {
  Hyperparameters values;
  std::string config;
  std::string mtl;
  std::string model = "ttita";
  std::vector<std::pair<CLI::Option*, std::function<void(Hyperparameters&)>>> bound;

  template <typename T>
  void bind(CLI::App& app, const std::string& name, T Hyperparameters::*field, const std::string& help) {
    auto holder = std::make_shared<T>(values.*field);
    CLI::Option* opt = app.add_option(name, *holder, help)->capture_default_str();
    bound.emplace_back(opt, [holder, field](Hyperparameters& hp) { hp.*field = *holder; });
  }

  void add(CLI::App& app, bool with_kind) {
    app.add_option("--config", config, "JSON file of hyperparameters");
    bind(app, "--numeric-width", &Hyperparameters::numeric_width, "d_n, width of the numeric block");
    bind(app, "--categorical-width", &Hyperparameters::categorical_width, "d_c, width per categorical column");
    bind(app, "--text-width", &Hyperparameters::text_width, "d_t, hashed width per text column");
    bind(app, "--layers", &Hyperparameters::num_layers, "decoder layers");
    bind(app, "--heads", &Hyperparameters::num_heads, "attention heads (upper bound)");
    bind(app, "--ffn", &Hyperparameters::ffn_hidden, "feed-forward hidden width");
    bind(app, "--dropout", &Hyperparameters::dropout, "dropout rate");
    bind(app, "--lr", &Hyperparameters::learning_rate, "Adam learning rate");
    bind(app, "--batch-size", &Hyperparameters::batch_size, "rows per mini-batch");
    bind(app, "--epochs", &Hyperparameters::epochs, "training epochs");
    bind(app, "--max-len", &Hyperparameters::max_len, "maximum target length in tokens");
    bind(app, "--vocab-cap", &Hyperparameters::vocab_cap, "corpus tokens kept in the vocabulary (specials extra)");
    bind(app, "--seed", &Hyperparameters::seed, "training seed");
    bind(app, "--memory-chunks", &Hyperparameters::memory_chunks, "split the context into this many memory slots");
    bound.emplace_back(app.add_option("--mtl", mtl, "comma-separated auxiliary targets trained as extra heads"),
                       [this](Hyperparameters& hp) { hp.mtl_targets = split_list(mtl); });
    if (with_kind) {
      bound.emplace_back(
          app.add_option("--model", model, "ttita or decoder")->check(CLI::IsMember({"ttita", "decoder"})),
          [this](Hyperparameters& hp) { hp.kind = model == "decoder" ? ModelKind::decoder_only : ModelKind::ttita; });
    }
  }

  Hyperparameters resolve() const {
    Hyperparameters hp;
    if (!config.empty()) {
      require_file(config, "config file");
      try {
        hp = Hyperparameters::from_json(nlohmann::json::parse(read_file(config)));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config + ": " + e.what());
      }
    }
    for (const auto& [opt, apply] : bound)
      if (opt->count() > 0) apply(hp);
    return hp;
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
      if (!item.empty()) out.push_back(item);
    return out;
  }
};

std::string fmt_loss(const LossSummary& s) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f (text %.6f, mse %.6f, cat %.6f)", s.total, s.text, s.mse, s.categorical);
  return buf;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

// train ---------------------------------------------------------------

struct TrainArgs {
  std::string schema, data, valid, out, log;
  std::uint64_t split_seed = 0;
  HyperFlags hp;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  require_file(a.schema, "schema file");
  require_file(a.data, "data file");
  const Schema schema = Schema::load(a.schema);
  const Hyperparameters hp = a.hp.resolve();
  Dataset all = load_csv(a.data, schema);
  Dataset train_raw, valid_raw;
  if (!a.valid.empty()) {
    require_file(a.valid, "validation file");
    train_raw = std::move(all);
    valid_raw = load_csv(a.valid, schema);
  } else {
    SplitData parts = split(all, a.split_seed);
    train_raw = std::move(parts.train);
    valid_raw = std::move(parts.valid);
    out << "split: " << train_raw.rows() << " train, " << valid_raw.rows() << " valid, " << parts.test.rows()
        << " test (held out)\n";
  }

  TrainOptions opts;
  opts.on_epoch = [&out](const EpochLog& e) {
    out << "epoch " << e.epoch << "  train " << fmt_loss(e.train) << "  valid " << fmt_loss(e.valid) << "\n";
    out.flush();
  };
  const FitResult fitted = fit(train_raw, valid_raw, hp, opts);
  fitted.checkpoint.save(a.out);
  out << "best epoch " << fitted.result.best_epoch << " (loss " << fitted.result.best_loss << ")\n";
  out << "wrote " << a.out << "\n";
  if (!a.log.empty()) write_json(a.log, fitted.result.to_json());
  return kOk;
}

// impute --------------------------------------------------------------

struct ImputeArgs {
  std::string model, data, out;
  bool only_missing = false;
  std::size_t batch_size = 64;
};

int cmd_impute(const ImputeArgs& a, std::ostream& out) {
  require_file(a.model, "checkpoint");
  require_file(a.data, "data file");
  const Checkpoint ckpt = Checkpoint::load(a.model);
  const TtitaModel model = ckpt.instantiate();
  csv::Table table = csv::read(a.data);
  const Dataset raw = from_table(table, ckpt.schema, true);
  ImputeOptions opts;
  opts.only_missing = a.only_missing;
  opts.batch_size = a.batch_size;
  const auto columns = impute(model, raw, opts);
  apply_imputation(table, columns);
  write_file_atomic(a.out, csv::format(table));
  std::size_t written = 0;
  for (const auto& c : columns)
    for (const auto& v : c.values) written += v.has_value();
  out << "imputed " << written << " cell(s) in " << columns.size() << " column(s) over " << raw.rows()
      << " row(s); wrote " << a.out << "\n";
  return kOk;
}

// eval ----------------------------------------------------------------

struct EvalArgs {
  std::string predictions, references, column, prediction_column, json;
};

std::vector<std::string> column_values(const csv::Table& t, const std::string& name, const std::string& file) {
  std::size_t pos = std::string::npos;
  if (name.empty()) {
    if (t.header.size() != 1) throw ConfigError(file + " has " + std::to_string(t.header.size()) + " columns; pass --column");
    pos = 0;
  } else {
    pos = t.column(name);
    if (pos == std::string::npos) throw SchemaError(file + " has no column '" + name + "'");
  }
  std::vector<std::string> values;
  values.reserve(t.records.size());
  for (const auto& r : t.records) values.push_back(r.fields[pos]);
  return values;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  require_file(a.predictions, "predictions file");
  require_file(a.references, "references file");
  const auto pred_table = csv::read(a.predictions);
  const auto ref_table = csv::read(a.references);
  const auto refs = column_values(ref_table, a.column, a.references);
  const auto preds =
      column_values(pred_table, a.prediction_column.empty() ? a.column : a.prediction_column, a.predictions);
  if (refs.size() != preds.size())
    throw SchemaError("row count mismatch: " + std::to_string(preds.size()) + " predictions, " +
                      std::to_string(refs.size()) + " references");
  const metrics::ScoreReport rep = metrics::score(refs, preds);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %8s %8s %8s\n%-8s %8.4f %8.4f %8.4f\n", "n", "METEOR", "ROUGE", "BLEU",
                std::to_string(rep.n_pairs).c_str(), rep.meteor, rep.rouge1_f1, rep.bleu1);
  out << buf;
  const auto j = rep.to_json();
  out << j.dump() << "\n";
  if (!a.json.empty()) write_json(a.json, j);
  return kOk;
}

// benchmark -----------------------------------------------------------

struct BenchArgs {
  std::string schema, data, methods = "mode,knn,decoder,ttita,ttita-mtl", json;
  std::size_t rows = 0;
  std::uint64_t split_seed = 0;
  HyperFlags hp;
};

int cmd_benchmark(const BenchArgs& a, std::ostream& out) {
  BenchmarkOptions opts;
  opts.methods = parse_methods(a.methods);
  opts.split_seed = a.split_seed;
  require_file(a.schema, "schema file");
  require_file(a.data, "data file");
  const Schema schema = Schema::load(a.schema);
  const Hyperparameters hp = a.hp.resolve();
  Dataset data = load_csv(a.data, schema);
  if (a.rows > 0 && a.rows < data.rows()) {
    std::vector<std::size_t> idx(data.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(a.split_seed);
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(a.rows);
    std::sort(idx.begin(), idx.end());
    data = data.subset(idx);
  }
  opts.train.on_epoch = [&out](const EpochLog& e) {
    out << "  epoch " << e.epoch << "  train " << e.train.total << "  valid " << e.valid.total << "\n";
    out.flush();
  };
  const BenchmarkReport report = run_benchmark(data, hp, opts);
  out << "split: " << report.train_rows << " train, " << report.valid_rows << " valid, " << report.test_rows
      << " test\n";
  out << report.table();
  if (!a.json.empty()) write_json(a.json, report.to_json());
  return kOk;
}

// inspect -------------------------------------------------------------

int cmd_inspect(const std::string& path, std::ostream& out) {
  require_file(path, "checkpoint");
  const Checkpoint ckpt = Checkpoint::load(path);
  out << ckpt.manifest().dump(2) << "\n";
  return kOk;
}

// synth ---------------------------------------------------------------

struct SynthArgs {
  std::string kind = "toy", out, schema_out;
  std::size_t rows = 32;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const synthetic::Table t = a.kind == "toy" ? synthetic::toy(a.rows, a.seed) : synthetic::reviews(a.rows, a.seed);
  write_file_atomic(a.out, csv::format(t.csv));
  if (!a.schema_out.empty()) write_json(a.schema_out, t.schema.to_json());
  out << "wrote " << t.csv.records.size() << " rows to " << a.out << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transformer imputation of text columns in tables", "ttita"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "fit a model and write a checkpoint");
  train_cmd->add_option("--schema", train.schema, "schema JSON")->required();
  train_cmd->add_option("--data", train.data, "training CSV (split 81/9/10 unless --valid is given)")->required();
  train_cmd->add_option("--valid", train.valid, "validation CSV");
  train_cmd->add_option("--out,-o", train.out, "checkpoint path")->required();
  train_cmd->add_option("--log", train.log, "write the epoch history as JSON");
  train_cmd->add_option("--split-seed", train.split_seed, "seed of the row split")->capture_default_str();
  train.hp.add(*train_cmd, true);

  ImputeArgs imp;
  auto* impute_cmd = app.add_subcommand("impute", "fill target columns of a CSV");
  impute_cmd->add_option("--model,-m", imp.model, "checkpoint")->required();
  impute_cmd->add_option("--data", imp.data, "input CSV")->required();
  impute_cmd->add_option("--out,-o", imp.out, "output CSV")->required();
  impute_cmd->add_flag("--only-missing", imp.only_missing, "write only cells that are empty");
  impute_cmd->add_option("--batch-size", imp.batch_size, "rows decoded together")->capture_default_str();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "score imputed text against references");
  eval_cmd->add_option("--predictions,-p", ev.predictions, "CSV with imputed text")->required();
  eval_cmd->add_option("--references,-r", ev.references, "CSV with ground truth")->required();
  eval_cmd->add_option("--column,-c", ev.column, "text column (optional for one-column files)");
  eval_cmd->add_option("--prediction-column", ev.prediction_column, "column in the predictions file if different");
  eval_cmd->add_option("--json", ev.json, "also write the scores to this file");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "compare methods on one split");
  bench_cmd->add_option("--schema", bench.schema, "schema JSON")->required();
  bench_cmd->add_option("--data", bench.data, "CSV")->required();
  bench_cmd->add_option("--methods", bench.methods, "comma-separated: mode,knn,decoder,ttita,ttita-mtl")
      ->capture_default_str();
  bench_cmd->add_option("--rows", bench.rows, "random subsample of this many rows (0 = all)");
  bench_cmd->add_option("--split-seed", bench.split_seed, "seed of the row split and subsample")
      ->capture_default_str();
  bench_cmd->add_option("--json", bench.json, "write the report as JSON");
  bench.hp.add(*bench_cmd, false);

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "print a checkpoint manifest");
  inspect_cmd->add_option("checkpoint", inspect_path, "checkpoint file")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset");
  synth_cmd->add_option("--kind", synth.kind, "toy or reviews")
      ->check(CLI::IsMember({"toy", "reviews"}))
      ->capture_default_str();
  synth_cmd->add_option("--rows", synth.rows, "row count")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--out,-o", synth.out, "CSV path")->required();
  synth_cmd->add_option("--schema-out", synth.schema_out, "schema JSON path");

  std::vector<std::string> owned{"ttita"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : owned) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*impute_cmd) return cmd_impute(imp, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*bench_cmd) return cmd_benchmark(bench, out);
    if (*inspect_cmd) return cmd_inspect(inspect_path, out);
    if (*synth_cmd) return cmd_synth(synth, out);
  } catch (const MissingFile& e) {
    err << "error: " << e.what() << "\n";
    return kMissingFile;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace ttita::cli
