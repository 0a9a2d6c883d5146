#include "ttita/imputer.hpp"

#include <charconv>
#include <numeric>

#include "ttita/error.hpp"

namespace ttita {

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("format_number: conversion failed");
  return std::string(buf, ptr);
}

namespace {

std::vector<std::vector<int>> generate_rows(const TtitaModel& model, const FeatureTable& features,
                                            const std::vector<std::size_t>& rows, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("impute batch size must be positive");
  std::vector<std::vector<int>> out;
  out.reserve(rows.size());
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::size_t end = std::min(rows.size(), start + batch_size);
    auto part = model.generate(features, std::span(rows).subspan(start, end - start));
    for (auto& p : part) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<std::string> generate_text(const TtitaModel& model, const Dataset& raw, std::size_t batch_size) {
  const auto ds = preprocess(raw, model.preprocessing());
  const auto features = featurize(ds, model.hyperparameters().hash());
  std::vector<std::size_t> rows(ds.rows());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::string> out;
  for (const auto& ids : generate_rows(model, features, rows, batch_size)) {
    out.push_back(join_tokens(decode_sequence(ids, model.vocab())));
  }
  return out;
}

std::vector<ImputedColumn> impute(const TtitaModel& model, const Dataset& raw, const ImputeOptions& options) {
  if (!(raw.schema() == model.schema())) throw SchemaError("impute: data schema differs from the checkpoint schema");
  const auto ds = preprocess(raw, model.preprocessing());
  const auto features = featurize(ds, model.hyperparameters().hash());
  const std::size_t n = ds.rows();
  std::vector<ImputedColumn> out;

  const auto& text_name = model.schema().text_target();
  const auto& text_col = raw.column(text_name);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < n; ++r)
    if (!options.only_missing || text_col.missing(r)) rows.push_back(r);
  ImputedColumn text{text_name, std::vector<std::optional<std::string>>(n)};
  const auto ids = generate_rows(model, features, rows, options.batch_size);
  for (std::size_t i = 0; i < rows.size(); ++i) text.values[rows[i]] = join_tokens(decode_sequence(ids[i], model.vocab()));
  out.push_back(std::move(text));

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const auto numeric = model.predict_numeric(features, all);
  for (std::size_t h = 0; h < model.numeric_heads().size(); ++h) {
    const auto& name = model.numeric_heads()[h];
    const auto& stats = model.preprocessing().numeric_stats.at(name);
    const auto& col = raw.column(name);
    ImputedColumn c{name, std::vector<std::optional<std::string>>(n)};
    for (std::size_t r = 0; r < n; ++r)
      if (!options.only_missing || col.missing(r)) c.values[r] = format_number(stats.destandardize(numeric[h][r]));
    out.push_back(std::move(c));
  }
  const auto categorical = model.predict_categorical(features, all);
  for (std::size_t h = 0; h < model.categorical_heads().size(); ++h) {
    const auto& name = model.categorical_heads()[h];
    const auto& map = model.preprocessing().category_maps.at(name);
    const auto& col = raw.column(name);
    ImputedColumn c{name, std::vector<std::optional<std::string>>(n)};
    for (std::size_t r = 0; r < n; ++r)
      if (!options.only_missing || col.missing(r)) c.values[r] = map.level(categorical[h][r]);
    out.push_back(std::move(c));
  }
  return out;
}

void apply_imputation(csv::Table& table, const std::vector<ImputedColumn>& columns) {
  for (const auto& c : columns) {
    if (c.values.size() != table.records.size()) {
      throw SchemaError("imputed column '" + c.name + "' has " + std::to_string(c.values.size()) + " rows, table has " +
                        std::to_string(table.records.size()));
    }
    auto pos = table.column(c.name);
    if (pos == std::string::npos) {
      pos = table.header.size();
      table.header.push_back(c.name);
      for (auto& rec : table.records) {
        rec.fields.emplace_back();
        rec.raw.emplace_back();
      }
    }
    for (std::size_t r = 0; r < c.values.size(); ++r)
      if (c.values[r]) table.records[r].fields[pos] = *c.values[r];
  }
}

}  // namespace ttita
