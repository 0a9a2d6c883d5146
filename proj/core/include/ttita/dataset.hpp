#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ttita/csv.hpp"
#include "ttita/schema.hpp"

namespace ttita {

struct NumericStats {
  double mean = 0.0;
  double stddev = 0.0;

  double standardize(double x) const { return stddev > 0.0 ? (x - mean) / stddev : 0.0; }
  double destandardize(double z) const { return mean + z * stddev; }
  bool operator==(const NumericStats&) const = default;
};

/// Category level <-> dense index. Index 0 is the reserved "missing" level;
/// observed levels follow in lexicographic order. Unseen levels map to 0.
class CategoryMap {
 public:
  static constexpr std::string_view kMissing = "<missing>";

  CategoryMap();
  static CategoryMap fit(std::span<const std::optional<std::string>> values);
  static CategoryMap from_levels(std::vector<std::string> levels);

  std::size_t index_of(const std::optional<std::string>& value) const;
  const std::string& level(std::size_t index) const;
  const std::vector<std::string>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  bool operator==(const CategoryMap& o) const { return levels_ == o.levels_; }

 private:
  std::vector<std::string> levels_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Fill and scaling state learned from the training split.
struct Preprocessing {
  std::map<std::string, NumericStats> numeric_stats;
  std::map<std::string, CategoryMap> category_maps;

  nlohmann::json to_json() const;
  static Preprocessing from_json(const nlohmann::json& j);
  bool operator==(const Preprocessing&) const = default;
};

/// One typed column. Numeric columns use `numbers`, the others `strings`;
/// std::nullopt marks a missing cell.
struct Column {
  ColumnKind kind = ColumnKind::text;
  std::vector<std::optional<double>> numbers;
  std::vector<std::optional<std::string>> strings;

  bool missing(std::size_t row) const {
    return kind == ColumnKind::numeric ? !numbers[row].has_value() : !strings[row].has_value();
  }
};

/// Rows of a table typed against a schema, stored column-wise.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Schema schema);

  const Schema& schema() const { return schema_; }
  std::size_t rows() const { return rows_; }
  const Column& column(std::string_view name) const;
  Column& column(std::string_view name);

  /// Appends a row of raw cell text keyed by schema order. Empty cells and
  /// unparsable numerics become missing.
  void append_row(std::span<const std::string> cells);

  Dataset subset(std::span<const std::size_t> indices) const;

  bool filled = false;
  bool standardized = false;
  /// Statistics this dataset was filled/standardized with (if any).
  std::optional<Preprocessing> stats;

 private:
  Schema schema_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

/// Parses one numeric cell; empty, unparsable or non-finite text is missing.
std::optional<double> parse_number(std::string_view cell);

/// Types the columns of a parsed CSV table named by `schema`. Columns of
/// the table not in the schema are ignored; target columns absent from the
/// table are allowed only when `allow_missing_targets` (all cells missing).
Dataset from_table(const csv::Table& table, const Schema& schema, bool allow_missing_targets = false);
Dataset load_csv(const std::filesystem::path& path, const Schema& schema, bool allow_missing_targets = false);

/// Statistics from the non-missing values of `train`. Throws when a numeric
/// column has no observed value.
Preprocessing fit_preprocessing(const Dataset& train);

/// Input cells: numeric missing -> training mean, categorical missing ->
/// reserved missing level, text missing -> "". Targets are left untouched.
Dataset fill_missing(const Dataset& dataset, const Preprocessing& stats);

/// Z-scores every numeric column (inputs, and non-missing targets) with the
/// training statistics; zero-variance columns map to 0.
Dataset standardize(const Dataset& dataset, const Preprocessing& stats);

/// fill_missing followed by standardize.
Dataset preprocess(const Dataset& dataset, const Preprocessing& stats);

/// Row indices for an 81/9/10 split: test = floor(0.10 n), valid =
/// floor(0.09 n), the rest train; assignment by a seeded shuffle.
struct SplitIndices {
  std::vector<std::size_t> train, valid, test;
};
SplitIndices split_indices(std::size_t n, std::uint64_t seed);

struct SplitData {
  Dataset train, valid, test;
};
SplitData split(const Dataset& dataset, std::uint64_t seed);

/// Row-major indicator matrix for a categorical column.
struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};
DenseMatrix one_hot(const Dataset& dataset, std::string_view column, const Preprocessing& stats);

}  // namespace ttita
