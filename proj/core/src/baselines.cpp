#include "ttita/baselines.hpp"

#include <limits>
#include <map>

#include "ttita/error.hpp"

namespace ttita::baselines {

std::string mode_impute(std::span<const std::optional<std::string>> train_targets) {
  std::map<std::string_view, std::size_t> counts;
  for (const auto& t : train_targets)
    if (t) ++counts[*t];
  if (counts.empty()) throw ConfigError("mode_impute: no training targets");
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return std::string(best->first);
}

KnnIndex KnnIndex::build(const Dataset& train, const HashConfig& hash) {
  if (!train.filled || !train.standardized || !train.stats) {
    throw ConfigError("KnnIndex: training data must be filled and standardized");
  }
  KnnIndex idx;
  idx.schema_ = train.schema();
  idx.stats_ = *train.stats;
  idx.hash_ = hash;
  const auto& s = idx.schema_;
  idx.dimension_ = s.inputs(ColumnKind::numeric).size() + s.inputs(ColumnKind::text).size() * hash.dimension;
  for (const auto& name : s.inputs(ColumnKind::categorical)) idx.dimension_ += idx.stats_.category_maps.at(name).size();
  const auto& target = train.column(s.text_target()).strings;
  for (std::size_t r = 0; r < train.rows(); ++r) {
    if (!target[r]) continue;
    const auto f = idx.features(train, r);
    idx.matrix_.insert(idx.matrix_.end(), f.begin(), f.end());
    idx.targets_.push_back(*target[r]);
  }
  return idx;
}

std::vector<double> KnnIndex::features(const Dataset& data, std::size_t row) const {
  std::vector<double> f;
  f.reserve(dimension_);
  for (const auto& name : schema_.inputs(ColumnKind::numeric)) f.push_back(data.column(name).numbers[row].value_or(0.0));
  for (const auto& name : schema_.inputs(ColumnKind::categorical)) {
    const auto& map = stats_.category_maps.at(name);
    const auto hot = map.index_of(data.column(name).strings[row]);
    for (std::size_t c = 0; c < map.size(); ++c) f.push_back(c == hot ? 1.0 : 0.0);
  }
  for (const auto& name : schema_.inputs(ColumnKind::text)) {
    for (real v : hash_features(data.column(name).strings[row].value_or(""), hash_)) f.push_back(v);
  }
  return f;
}

std::size_t KnnIndex::nearest(std::span<const double> query) const {
  if (targets_.empty()) throw ConfigError("KnnIndex: index is empty");
  if (query.size() != dimension_) {
    throw ShapeError("KnnIndex: query has " + std::to_string(query.size()) + " features, index has " +
                     std::to_string(dimension_));
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    const double* x = matrix_.data() + i * dimension_;
    double d = 0;
    for (std::size_t k = 0; k < dimension_ && d < best_d; ++k) d += (x[k] - query[k]) * (x[k] - query[k]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::string KnnIndex::impute(std::span<const double> query) const { return targets_[nearest(query)]; }

FitResult decoder_only_train(const Dataset& train_raw, const Dataset& valid_raw, Hyperparameters hp,
                             const TrainOptions& options) {
  hp.kind = ModelKind::decoder_only;
  hp.mtl_targets.clear();
  return fit(train_raw, valid_raw, hp, options);
}

}  // namespace ttita::baselines
