#pragma once

#include <cstdint>

#include "ttita/csv.hpp"
#include "ttita/schema.hpp"

namespace ttita::synthetic {

struct Table {
  csv::Table csv;
  Schema schema;
};

/// Small table with two numeric inputs, one categorical input, one text
/// input, a short text target that is a function of the inputs, and one
/// numeric and one categorical auxiliary target.
Table toy(std::size_t rows, std::uint64_t seed);

/// Product-review table shaped like a gift-card review dump: rating,
/// verified flag, reviewer id, review text, item feature (often missing),
/// summary target; review time and main category as auxiliary targets.
/// Summaries depend on the rating and echo words of the review.
Table reviews(std::size_t rows, std::uint64_t seed);

}  // namespace ttita::synthetic
