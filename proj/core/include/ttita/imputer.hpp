#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttita/checkpoint.hpp"
#include "ttita/csv.hpp"

namespace ttita {

struct ImputeOptions {
  /// Only write cells whose value is missing.
  bool only_missing = false;
  /// Rows decoded together.
  std::size_t batch_size = 64;
};

/// New values for one target column; nullopt leaves the cell untouched.
struct ImputedColumn {
  std::string name;
  std::vector<std::optional<std::string>> values;
};

/// Text target first, then numeric heads, then categorical heads.
/// Numeric predictions are mapped back to the original scale; categorical
/// heads emit the argmax level name.
std::vector<ImputedColumn> impute(const TtitaModel& model, const Dataset& raw, const ImputeOptions& options = {});

/// Generated text per row for every row of `raw` (no only-missing logic).
std::vector<std::string> generate_text(const TtitaModel& model, const Dataset& raw, std::size_t batch_size = 64);

/// Writes imputed values into a parsed CSV, appending target columns the
/// table lacks. Untouched cells keep their original bytes.
void apply_imputation(csv::Table& table, const std::vector<ImputedColumn>& columns);

/// Shortest round-trip decimal text for a double.
std::string format_number(double value);

}  // namespace ttita
