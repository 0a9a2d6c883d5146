#include "ttita/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "ttita/error.hpp"
#include "ttita/rng.hpp"

namespace ttita {

CategoryMap::CategoryMap() : levels_{std::string(kMissing)} { index_.emplace(kMissing, 0); }

CategoryMap CategoryMap::fit(std::span<const std::optional<std::string>> values) {
  std::set<std::string> seen;
  for (const auto& v : values)
    if (v && *v != kMissing) seen.insert(*v);
  std::vector<std::string> levels{std::string(kMissing)};
  levels.insert(levels.end(), seen.begin(), seen.end());
  return from_levels(std::move(levels));
}

CategoryMap CategoryMap::from_levels(std::vector<std::string> levels) {
  if (levels.empty() || levels.front() != kMissing) {
    throw SchemaError("category map must start with the reserved missing level");
  }
  CategoryMap m;
  m.levels_ = std::move(levels);
  m.index_.clear();
  for (std::size_t i = 0; i < m.levels_.size(); ++i) {
    if (!m.index_.emplace(m.levels_[i], i).second) throw SchemaError("duplicate category level '" + m.levels_[i] + "'");
  }
  return m;
}

std::size_t CategoryMap::index_of(const std::optional<std::string>& value) const {
  if (!value) return 0;
  const auto it = index_.find(*value);
  return it == index_.end() ? 0 : it->second;
}

const std::string& CategoryMap::level(std::size_t index) const {
  if (index >= levels_.size()) {
    throw ShapeError("category index " + std::to_string(index) + " outside " + std::to_string(levels_.size()) + " levels");
  }
  return levels_[index];
}

nlohmann::json Preprocessing::to_json() const {
  nlohmann::json num = nlohmann::json::object();
  for (const auto& [name, s] : numeric_stats) num[name] = {{"mean", s.mean}, {"stddev", s.stddev}};
  nlohmann::json cat = nlohmann::json::object();
  for (const auto& [name, m] : category_maps) cat[name] = m.levels();
  return {{"numeric_stats", num}, {"category_maps", cat}};
}

Preprocessing Preprocessing::from_json(const nlohmann::json& j) {
  Preprocessing p;
  for (const auto& [name, s] : j.at("numeric_stats").items()) {
    p.numeric_stats[name] = {s.at("mean").get<double>(), s.at("stddev").get<double>()};
  }
  for (const auto& [name, levels] : j.at("category_maps").items()) {
    p.category_maps[name] = CategoryMap::from_levels(levels.get<std::vector<std::string>>());
  }
  return p;
}

Dataset::Dataset(Schema schema) : schema_(std::move(schema)) {
  for (const auto& c : schema_.columns()) columns_.push_back(Column{c.kind, {}, {}});
}

const Column& Dataset::column(std::string_view name) const {
  const auto& cols = schema_.columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i].name == name) return columns_[i];
  throw SchemaError("unknown column '" + std::string(name) + "'");
}

Column& Dataset::column(std::string_view name) {
  return const_cast<Column&>(static_cast<const Dataset&>(*this).column(name));
}

std::optional<double> parse_number(std::string_view cell) {
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.remove_prefix(1);
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.remove_suffix(1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

void Dataset::append_row(std::span<const std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw SchemaError("row has " + std::to_string(cells.size()) + " cells, schema has " +
                      std::to_string(columns_.size()) + " columns");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& col = columns_[i];
    if (col.kind == ColumnKind::numeric) {
      col.numbers.push_back(parse_number(cells[i]));
    } else if (cells[i].empty()) {
      col.strings.emplace_back(std::nullopt);
    } else {
      col.strings.emplace_back(cells[i]);
    }
  }
  ++rows_;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out(schema_);
  out.filled = filled;
  out.standardized = standardized;
  out.stats = stats;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& src = columns_[c];
    auto& dst = out.columns_[c];
    for (auto r : indices) {
      if (r >= rows_) throw SchemaError("row index " + std::to_string(r) + " out of range");
      if (src.kind == ColumnKind::numeric) {
        dst.numbers.push_back(src.numbers[r]);
      } else {
        dst.strings.push_back(src.strings[r]);
      }
    }
  }
  out.rows_ = indices.size();
  return out;
}

Dataset from_table(const csv::Table& table, const Schema& schema, bool allow_missing_targets) {
  std::vector<std::size_t> positions;
  std::vector<std::string> absent;
  for (const auto& c : schema.columns()) {
    const auto pos = table.column(c.name);
    if (pos == std::string::npos && !(allow_missing_targets && c.role == ColumnRole::target)) absent.push_back(c.name);
    positions.push_back(pos);
  }
  if (!absent.empty()) {
    std::string names;
    for (const auto& n : absent) names += (names.empty() ? "" : ", ") + n;
    throw SchemaError("CSV header is missing schema column(s): " + names);
  }
  Dataset ds(schema);
  std::vector<std::string> cells(positions.size());
  for (const auto& rec : table.records) {
    for (std::size_t i = 0; i < positions.size(); ++i) {
      cells[i] = positions[i] == std::string::npos ? std::string() : rec.fields[positions[i]];
    }
    ds.append_row(cells);
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema, bool allow_missing_targets) {
  return from_table(csv::read(path), schema, allow_missing_targets);
}

Preprocessing fit_preprocessing(const Dataset& train) {
  Preprocessing p;
  for (const auto& c : train.schema().columns()) {
    const auto& col = train.column(c.name);
    if (c.kind == ColumnKind::numeric) {
      double total = 0;
      std::size_t n = 0;
      for (const auto& v : col.numbers)
        if (v) {
          total += *v;
          ++n;
        }
      if (n == 0) throw SchemaError("numeric column '" + c.name + "' has no observed training value; mean undefined");
      const double mean = total / static_cast<double>(n);
      double ss = 0;
      for (const auto& v : col.numbers)
        if (v) ss += (*v - mean) * (*v - mean);
      p.numeric_stats[c.name] = {mean, std::sqrt(ss / static_cast<double>(n))};
    } else if (c.kind == ColumnKind::categorical) {
      p.category_maps[c.name] = CategoryMap::fit(col.strings);
    }
  }
  return p;
}

namespace {

const NumericStats& stats_for(const Preprocessing& stats, const std::string& name) {
  const auto it = stats.numeric_stats.find(name);
  if (it == stats.numeric_stats.end()) throw SchemaError("no numeric statistics for column '" + name + "'");
  return it->second;
}

}  // namespace

Dataset fill_missing(const Dataset& dataset, const Preprocessing& stats) {
  Dataset out = dataset;
  for (const auto& c : dataset.schema().columns()) {
    if (c.role != ColumnRole::input) continue;
    auto& col = out.column(c.name);
    switch (c.kind) {
      case ColumnKind::numeric: {
        const auto& s = stats_for(stats, c.name);
        // Already-standardized data fills with the standardized mean.
        const double fill = dataset.standardized ? 0.0 : s.mean;
        for (auto& v : col.numbers)
          if (!v) v = fill;
        break;
      }
      case ColumnKind::categorical:
        for (auto& v : col.strings)
          if (!v) v = std::string(CategoryMap::kMissing);
        break;
      case ColumnKind::text:
        for (auto& v : col.strings)
          if (!v) v = std::string();
        break;
    }
  }
  out.filled = true;
  out.stats = stats;
  return out;
}

Dataset standardize(const Dataset& dataset, const Preprocessing& stats) {
  if (dataset.standardized) throw ConfigError("standardize: dataset is already standardized");
  Dataset out = dataset;
  for (const auto& c : dataset.schema().columns()) {
    if (c.kind != ColumnKind::numeric) continue;
    const auto& s = stats_for(stats, c.name);
    for (auto& v : out.column(c.name).numbers)
      if (v) v = s.standardize(*v);
  }
  out.standardized = true;
  out.stats = stats;
  return out;
}

Dataset preprocess(const Dataset& dataset, const Preprocessing& stats) {
  return standardize(fill_missing(dataset, stats), stats);
}

SplitIndices split_indices(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw ConfigError("split: need at least 10 rows, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t n_test = n / 10;
  const std::size_t n_valid = n * 9 / 100;
  SplitIndices s;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.valid.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                 order.begin() + static_cast<std::ptrdiff_t>(n_test + n_valid));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_valid), order.end());
  for (auto* part : {&s.train, &s.valid, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

SplitData split(const Dataset& dataset, std::uint64_t seed) {
  const auto idx = split_indices(dataset.rows(), seed);
  return {dataset.subset(idx.train), dataset.subset(idx.valid), dataset.subset(idx.test)};
}

DenseMatrix one_hot(const Dataset& dataset, std::string_view column, const Preprocessing& stats) {
  const auto& schema_col = dataset.schema().at(column);
  if (schema_col.kind != ColumnKind::categorical) {
    throw SchemaError("one_hot: column '" + schema_col.name + "' is not categorical");
  }
  const auto it = stats.category_maps.find(schema_col.name);
  if (it == stats.category_maps.end()) throw SchemaError("no category map for column '" + schema_col.name + "'");
  const auto& map = it->second;
  const auto& col = dataset.column(column);
  DenseMatrix m{dataset.rows(), map.size(), std::vector<double>(dataset.rows() * map.size(), 0.0)};
  for (std::size_t r = 0; r < dataset.rows(); ++r) m.values[r * m.cols + map.index_of(col.strings[r])] = 1.0;
  return m;
}

}  // namespace ttita
