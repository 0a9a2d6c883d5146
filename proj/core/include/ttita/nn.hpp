#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ttita/rng.hpp"
#include "ttita/tensor.hpp"

namespace ttita::nn {

/// Ordered, named collection of trainable tensors. Registration order is the
/// checkpoint order and the optimizer order.
class ParameterSet {
 public:
  Tensor add(std::string name, Tensor value);

  std::vector<Tensor> tensors() const;
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  const Tensor* find(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }
  /// Total scalar count.
  std::size_t count() const;

  /// Value copies, for keeping the best epoch's weights.
  std::vector<std::vector<real>> snapshot() const;
  void restore(const std::vector<std::vector<real>>& values);
  void zero_grad();
  void ensure_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// y = x W + b with W of shape [in, out]. Glorot-uniform W, zero b.
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear create(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  Tensor operator()(const Tensor& x) const;
  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
};

/// Lookup table initialized from N(0, 0.02).
struct Embedding {
  Tensor table;

  static Embedding create(ParameterSet& params, const std::string& name, std::size_t rows, std::size_t dim, Rng& rng);
  Tensor operator()(std::span<const int> ids) const;
};

}  // namespace ttita::nn
