#include "ttita/synthetic.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ttita/imputer.hpp"
#include "ttita/rng.hpp"

namespace ttita::synthetic {

namespace {

void add_row(csv::Table& t, std::vector<std::string> fields) {
  csv::Record rec;
  rec.raw.reserve(fields.size());
  for (const auto& f : fields) rec.raw.push_back(csv::quote(f));
  rec.fields = std::move(fields);
  rec.line = t.records.size() + 2;
  t.records.push_back(std::move(rec));
}

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& options) {
  return options[rng.below(N)];
}

std::string fixed(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  return format_number(std::round(v * scale) / scale);
}

}  // namespace

Table toy(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  Table out;
  out.schema = Schema({{"x1", ColumnKind::numeric, ColumnRole::input},
                       {"x2", ColumnKind::numeric, ColumnRole::input},
                       {"color", ColumnKind::categorical, ColumnRole::input},
                       {"note", ColumnKind::text, ColumnRole::input},
                       {"summary", ColumnKind::text, ColumnRole::target},
                       {"score", ColumnKind::numeric, ColumnRole::target},
                       {"tier", ColumnKind::categorical, ColumnRole::target}});
  out.csv.header = {"x1", "x2", "color", "note", "summary", "score", "tier"};
  constexpr std::array<const char*, 4> colors{"red", "blue", "green", "gold"};
  constexpr std::array<const char*, 4> adjectives{"great", "nice", "fine", "perfect"};
  constexpr std::array<const char*, 4> nouns{"gift", "card", "present", "choice"};
  constexpr std::array<const char*, 4> tiers{"bronze", "silver", "gold", "bronze"};
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = rng.below(4);
    const double x1 = rng.uniform(0.0, 4.0);
    const double x2 = rng.uniform(-1.0, 1.0);
    const std::size_t bucket = std::min<std::size_t>(3, static_cast<std::size_t>(x1));
    std::string summary = std::string(adjectives[c]) + " " + nouns[bucket];
    if (x2 > 0) summary += " !";
    const std::string note = std::string(colors[c]) + " item number " + std::to_string(r);
    const double score = x1 + 2.0 * x2 + rng.normal(0.0, 0.1);
    add_row(out.csv, {fixed(x1, 3), fixed(x2, 3), colors[c], note, summary, fixed(score, 3), tiers[bucket]});
  }
  return out;
}

Table reviews(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  Table out;
  out.schema = Schema({{"overall", ColumnKind::numeric, ColumnRole::input},
                       {"verified", ColumnKind::categorical, ColumnRole::input},
                       {"reviewer_id", ColumnKind::categorical, ColumnRole::input},
                       {"review_text", ColumnKind::text, ColumnRole::input},
                       {"feature", ColumnKind::text, ColumnRole::input},
                       {"summary", ColumnKind::text, ColumnRole::target},
                       {"unix_review_time", ColumnKind::numeric, ColumnRole::target},
                       {"main_cat", ColumnKind::categorical, ColumnRole::target}});
  out.csv.header = {"overall", "verified", "reviewer_id", "review_text", "feature", "summary", "unix_review_time", "main_cat"};

  // Summary phrases per star rating, most common first.
  const std::array<std::array<const char*, 4>, 5> summaries{{
      {"one star", "terrible", "do not buy", "waste of money"},
      {"two stars", "not great", "disappointed", "card did not work"},
      {"three stars", "ok", "it was ok", "works fine"},
      {"four stars", "good gift card", "nice gift", "easy to use"},
      {"five stars", "great gift card", "love it", "perfect gift"},
  }};
  constexpr std::array<const char*, 6> fillers{
      "bought this for my sister's birthday.", "arrived quickly in a nice box.", "used it online without issues.",
      "the balance showed up right away.", "would recommend to friends.", "gave it as a holiday present."};
  constexpr std::array<const char*, 4> features{"amazon gift card", "digital delivery", "no fees, no expiration",
                                                "redeemable toward millions of items"};
  constexpr std::array<const char*, 3> cats{"Gift Cards", "Amazon Home", "Grocery"};
  const std::size_t n_reviewers = std::max<std::size_t>(rows / 3, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    const double u = rng.uniform();
    const int stars = u < 0.55 ? 5 : u < 0.75 ? 4 : u < 0.85 ? 3 : u < 0.92 ? 2 : 1;
    const auto& options = summaries[static_cast<std::size_t>(stars - 1)];
    const double v = rng.uniform();
    const std::size_t choice = v < 0.45 ? 0 : v < 0.7 ? 1 : v < 0.88 ? 2 : 3;
    std::string summary = options[choice];
    std::string review = std::string(summary) + ". " + pick(rng, fillers);
    if (rng.uniform() < 0.3) review += std::string(" ") + pick(rng, fillers);
    const bool verified = rng.uniform() < 0.8;
    const std::string reviewer = "A" + std::to_string(1000 + rng.below(n_reviewers));
    std::string feature = rng.uniform() < 0.4 ? std::string() : std::string(pick(rng, features));
    if (rng.uniform() < 0.001) review.clear();
    if (rng.uniform() < 0.0003) summary.clear();
    const double time = 1.4e9 + 1e7 * stars + rng.uniform(0.0, 5e7);
    const char* cat = stars >= 4 ? cats[0] : cats[1 + rng.below(2)];
    add_row(out.csv, {std::to_string(stars), verified ? "true" : "false", reviewer, review, feature, summary,
                      fixed(time, 0), cat});
  }
  return out;
}

}  // namespace ttita::synthetic
