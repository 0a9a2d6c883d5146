#include "ttita/nn.hpp"

#include <cmath>

#include "ttita/error.hpp"
#include "ttita/ops.hpp"

namespace ttita::nn {

Tensor ParameterSet::add(std::string name, Tensor value) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter name '" + name + "'");
  value.set_requires_grad(true);
  entries_.emplace_back(std::move(name), value);
  return value;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& [_, t] : entries_) out.push_back(t);
  return out;
}

const Tensor* ParameterSet::find(std::string_view name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return &t;
  return nullptr;
}

std::size_t ParameterSet::count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

std::vector<std::vector<real>> ParameterSet::snapshot() const {
  std::vector<std::vector<real>> out;
  for (const auto& [_, t] : entries_) out.emplace_back(t.data().begin(), t.data().end());
  return out;
}

void ParameterSet::restore(const std::vector<std::vector<real>>& values) {
  if (values.size() != entries_.size()) throw ConfigError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto dst = entries_[i].second.mutable_data();
    if (values[i].size() != dst.size()) throw ConfigError("restore: size mismatch for '" + entries_[i].first + "'");
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

void ParameterSet::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

void ParameterSet::ensure_grad() {
  for (auto& [_, t] : entries_) t.ensure_grad();
}

Linear Linear::create(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<real> w(in * out);
  for (auto& v : w) v = static_cast<real>(rng.uniform(-limit, limit));
  Linear l;
  l.weight = params.add(name + ".weight", Tensor::from({in, out}, std::move(w)));
  l.bias = params.add(name + ".bias", Tensor::zeros({out}));
  return l;
}

Tensor Linear::operator()(const Tensor& x) const { return ops::add(ops::matmul(x, weight), bias); }

Embedding Embedding::create(ParameterSet& params, const std::string& name, std::size_t rows, std::size_t dim, Rng& rng) {
  std::vector<real> w(rows * dim);
  for (auto& v : w) v = static_cast<real>(rng.normal(0.0, 0.02));
  return Embedding{params.add(name, Tensor::from({rows, dim}, std::move(w)))};
}

Tensor Embedding::operator()(std::span<const int> ids) const { return ops::embedding_lookup(table, ids); }

}  // namespace ttita::nn
