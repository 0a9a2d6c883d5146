#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ttita {

enum class ColumnKind { numeric, categorical, text };
enum class ColumnRole { input, target };

std::string_view to_string(ColumnKind kind);
std::string_view to_string(ColumnRole role);
ColumnKind parse_kind(std::string_view s);
ColumnRole parse_role(std::string_view s);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::text;
  ColumnRole role = ColumnRole::input;

  bool operator==(const ColumnSchema&) const = default;
};

/// Typed column list. Invariants (checked on construction): unique names,
/// at least one input column, exactly one text target. Non-text targets are
/// auxiliary and only used by multi-task runs.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnSchema> columns);

  static Schema from_json(const nlohmann::json& j);
  static Schema load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::vector<ColumnSchema>& columns() const { return columns_; }
  const ColumnSchema* find(std::string_view name) const;
  const ColumnSchema& at(std::string_view name) const;

  /// Input column names of `kind`, in schema order.
  std::vector<std::string> inputs(ColumnKind kind) const;
  const std::string& text_target() const;
  /// Numeric and categorical targets, in schema order.
  std::vector<std::string> auxiliary_targets() const;

  /// Copy with one input column removed (leave-one-out studies).
  Schema without(std::string_view name) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<ColumnSchema> columns_;
};

}  // namespace ttita
