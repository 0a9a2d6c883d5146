#pragma once

// Small hand-made tables shared by unit and acceptance tests.

#include <string>
#include <vector>

#include "ttita/dataset.hpp"
#include "ttita/model.hpp"
#include "ttita/schema.hpp"
#include "ttita/text.hpp"

namespace ttita::support {

inline Dataset make_dataset(const Schema& schema, const std::vector<std::vector<std::string>>& rows) {
  Dataset ds(schema);
  for (const auto& r : rows) ds.append_row(r);
  return ds;
}

/// x numeric, c categorical inputs; y text target; z numeric and k
/// categorical auxiliary targets.
inline Schema tiny_schema() {
  return Schema({{"x", ColumnKind::numeric, ColumnRole::input},
                 {"c", ColumnKind::categorical, ColumnRole::input},
                 {"y", ColumnKind::text, ColumnRole::target},
                 {"z", ColumnKind::numeric, ColumnRole::target},
                 {"k", ColumnKind::categorical, ColumnRole::target}});
}

/// d_model = 4 + 4 = 8, one layer, two heads, FFN 16.
inline Hyperparameters tiny_hp() {
  Hyperparameters hp;
  hp.numeric_width = 4;
  hp.categorical_width = 4;
  hp.text_width = 4;
  hp.num_layers = 1;
  hp.num_heads = 2;
  hp.ffn_hidden = 16;
  hp.dropout = 0.1;
  hp.batch_size = 2;
  hp.max_len = 8;
  hp.seed = 3;
  hp.mtl_targets = {"z", "k"};
  return hp;
}

/// Seven corpus words, so the vocabulary has 7 + 4 = 11 entries.
inline Vocab tiny_vocab() { return Vocab::build(std::vector<std::string>{"a b c d e f g"}, 100); }

/// Two rows, each with a two-token target: teacher-forced length 3.
inline Dataset tiny_rows() {
  return make_dataset(tiny_schema(), {{"0.5", "p", "a b", "1.5", "u"}, {"-1.25", "q", "c d", "-0.5", "v"}});
}

}  // namespace ttita::support
