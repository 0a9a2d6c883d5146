#include "ttita/schema.hpp"

#include <set>

#include "ttita/error.hpp"
#include "ttita/io.hpp"

namespace ttita {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::text: return "text";
  }
  return "?";
}

std::string_view to_string(ColumnRole role) { return role == ColumnRole::input ? "input" : "target"; }

ColumnKind parse_kind(std::string_view s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "text") return ColumnKind::text;
  throw SchemaError("unknown column kind '" + std::string(s) + "' (expected numeric, categorical or text)");
}

ColumnRole parse_role(std::string_view s) {
  if (s == "input") return ColumnRole::input;
  if (s == "target") return ColumnRole::target;
  throw SchemaError("unknown column role '" + std::string(s) + "' (expected input or target)");
}

Schema::Schema(std::vector<ColumnSchema> columns) : columns_(std::move(columns)) {
  std::set<std::string> seen;
  std::size_t n_inputs = 0, n_text_targets = 0;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw SchemaError("column with empty name");
    if (!seen.insert(c.name).second) throw SchemaError("duplicate column name '" + c.name + "'");
    if (c.role == ColumnRole::input) ++n_inputs;
    if (c.role == ColumnRole::target && c.kind == ColumnKind::text) ++n_text_targets;
  }
  if (n_inputs == 0) throw SchemaError("schema needs at least one input column");
  if (n_text_targets != 1) {
    throw SchemaError("schema needs exactly one text target column, found " + std::to_string(n_text_targets));
  }
}

Schema Schema::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array()) {
    throw SchemaError("schema must be an object with a 'columns' array");
  }
  std::vector<ColumnSchema> cols;
  for (const auto& c : j["columns"]) {
    if (!c.is_object() || !c.contains("name") || !c.contains("kind") || !c.contains("role")) {
      throw SchemaError("each schema column needs name, kind and role");
    }
    cols.push_back({c["name"].get<std::string>(), parse_kind(c["kind"].get<std::string>()),
                    parse_role(c["role"].get<std::string>())});
  }
  return Schema(std::move(cols));
}

Schema Schema::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("schema '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

nlohmann::json Schema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns_) {
    cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}, {"role", to_string(c.role)}});
  }
  return {{"columns", cols}};
}

const ColumnSchema* Schema::find(std::string_view name) const {
  for (const auto& c : columns_)
    if (c.name == name) return &c;
  return nullptr;
}

const ColumnSchema& Schema::at(std::string_view name) const {
  if (const auto* c = find(name)) return *c;
  throw SchemaError("unknown column '" + std::string(name) + "'");
}

std::vector<std::string> Schema::inputs(ColumnKind kind) const {
  std::vector<std::string> out;
  for (const auto& c : columns_)
    if (c.role == ColumnRole::input && c.kind == kind) out.push_back(c.name);
  return out;
}

const std::string& Schema::text_target() const {
  for (const auto& c : columns_)
    if (c.role == ColumnRole::target && c.kind == ColumnKind::text) return c.name;
  throw SchemaError("schema has no text target");
}

std::vector<std::string> Schema::auxiliary_targets() const {
  std::vector<std::string> out;
  for (const auto& c : columns_)
    if (c.role == ColumnRole::target && c.kind != ColumnKind::text) out.push_back(c.name);
  return out;
}

Schema Schema::without(std::string_view name) const {
  const auto& col = at(name);
  if (col.role != ColumnRole::input) throw SchemaError("can only drop input columns, '" + col.name + "' is a target");
  std::vector<ColumnSchema> cols;
  for (const auto& c : columns_)
    if (c.name != name) cols.push_back(c);
  return Schema(std::move(cols));
}

}  // namespace ttita
