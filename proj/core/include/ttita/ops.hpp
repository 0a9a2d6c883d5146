#pragma once

#include <span>
#include <vector>

#include "ttita/rng.hpp"
#include "ttita/tensor.hpp"

namespace ttita::ops {

// Tensors of rank > 2 are treated as matrices [rows, cols] where cols is the
// last dimension. Broadcasting is limited to adding a [cols] vector to every
// row; nothing more general is needed by the model.

/// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// Same shape, or `b` of shape [cols(a)] broadcast over rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product; `b` may be a [cols(a)] row vector.
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, real factor);
/// Concatenation along the last axis; all inputs share the same row count.
Tensor concat(const std::vector<Tensor>& parts);
/// Rows of `table` ([vocab, dim]) selected by `ids` -> [ids.size(), dim].
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);
/// Rows of a matrix selected by index -> [indices.size(), cols].
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
Tensor softmax_lastdim(const Tensor& x);
Tensor silu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
/// y = gain * x / sqrt(mean(x^2) + eps), per row.
Tensor rmsnorm(const Tensor& x, const Tensor& gain, real eps = real(1e-6));
/// Inverted dropout. Identity when `training` is false or rate is 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training);
Tensor reshape(const Tensor& x, Shape shape);
/// Columns [begin, end) of the last axis.
Tensor slice(const Tensor& x, std::size_t begin, std::size_t end);
Tensor mean(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor square(const Tensor& x);
Tensor log(const Tensor& x);

/// Rotary position encoding on [batch*seq_len, heads*head_dim]; row r holds
/// position r % seq_len. Pairs (2i, 2i+1) of each head rotate by
/// position * 10000^(-2i/head_dim). Throws on odd head_dim.
Tensor rope(const Tensor& x, std::size_t seq_len, std::size_t heads);

/// Optional sink for attention probabilities, laid out
/// [batch][head][query][key].
struct AttentionWeights {
  std::size_t batch = 0, heads = 0, queries = 0, keys = 0;
  std::vector<real> values;
  real at(std::size_t b, std::size_t h, std::size_t q, std::size_t k) const {
    return values[((b * heads + h) * queries + q) * keys + k];
  }
};

/// Multi-head scaled dot-product attention. `q` is [batch*q_len, d]; `k` and
/// `v` are [batch*kv_len, d]; d = heads*head_dim. Logits are scaled by
/// 1/sqrt(head_dim). With `causal`, key j > query i is masked to -inf
/// (requires q_len == kv_len).
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t batch,
                 std::size_t heads, bool causal, AttentionWeights* weights = nullptr);

/// Mean negative log-likelihood of `targets` under softmax(`logits`), over
/// rows whose target is non-negative. Returns 0 when no row counts.
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets);

}  // namespace ttita::ops
