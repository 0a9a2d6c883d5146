#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ttita/nn.hpp"
#include "ttita/ops.hpp"

namespace ttita {

struct DecoderConfig {
  std::size_t d_model = 0;
  std::size_t vocab_size = 0;
  std::size_t num_layers = 6;
  /// Requested head count; the decoder uses resolve_heads() of it.
  std::size_t num_heads = 4;
  std::size_t ffn_hidden = 1024;
  double dropout = 0.1;
  std::size_t max_len = 32;
  /// Memory length for cross-attention: the context vector is split into
  /// this many equal chunks. 1 keeps it a single memory element.
  std::size_t memory_chunks = 1;
  /// false removes the cross-attention sub-block (context-free decoder).
  bool cross_attention = true;
};

/// Largest h <= requested with d_model % h == 0 and an even head width (so
/// rotary pairs are complete). Throws when d_model is odd.
std::size_t resolve_heads(std::size_t requested, std::size_t d_model);

/// Padded token ids, row-major [batch, seq_len].
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::vector<int> ids;
};

/// Diagnostics captured during a forward pass, per layer.
struct DecoderProbe {
  std::vector<ops::AttentionWeights> self_attention;
  std::vector<ops::AttentionWeights> cross_attention;
  /// Cross-attention block output before the residual add, [B*T, d_model].
  std::vector<Tensor> cross_output;
};

struct SelfAttention {
  nn::Linear query, key, value, output;
  std::size_t heads = 1;

  /// x: [B*T, d]; RoPE on queries and keys; causal mask.
  Tensor operator()(const Tensor& x, std::size_t batch, std::size_t seq_len, ops::AttentionWeights* probe) const;
};

struct CrossAttention {
  nn::Linear query, key, value, output;
  std::size_t heads = 1;
  std::size_t memory_chunks = 1;

  /// Key/value memory for `context` [B, d_model] -> pair of [B*M, d_model].
  std::pair<Tensor, Tensor> memory(const Tensor& context) const;
  /// x: [B*T, d] attends over the memory rows of its own batch element.
  Tensor operator()(const Tensor& x, const std::pair<Tensor, Tensor>& memory, std::size_t batch,
                    ops::AttentionWeights* probe) const;
};

/// FC(d -> hidden) -> SiLU -> FC(hidden -> d).
struct FeedForward {
  nn::Linear up, down;
  Tensor operator()(const Tensor& x) const;
};

struct DecoderLayer {
  Tensor norm_self;
  Tensor norm_cross;
  SelfAttention self_attention;
  std::optional<CrossAttention> cross_attention;
  FeedForward feed_forward;

  /// RMSNorm -> self-attn -> dropout+add -> RMSNorm -> cross-attn ->
  /// dropout+add -> FFN -> dropout+add.
  Tensor operator()(const Tensor& x, const std::pair<Tensor, Tensor>* memory, std::size_t batch, std::size_t seq_len,
                    double dropout, bool training, Rng& rng, DecoderProbe* probe) const;
};

class Decoder {
 public:
  Decoder(const DecoderConfig& config, nn::ParameterSet& params, Rng& rng);

  const DecoderConfig& config() const { return config_; }
  std::size_t heads() const { return heads_; }
  const std::vector<DecoderLayer>& layers() const { return layers_; }

  /// Logits [batch*seq_len, vocab]. `context` is [batch, d_model], or
  /// undefined for a decoder without cross-attention.
  Tensor forward(const TokenBatch& tokens, const Tensor& context, bool training, Rng& rng,
                 DecoderProbe* probe = nullptr) const;

  /// Greedy decoding from [start] for each context row (or `batch` rows when
  /// the decoder is context-free); stops at [end] or after `max_len` tokens.
  /// Returned ids exclude [start] and [end]; ties pick the lowest id.
  std::vector<std::vector<int>> generate(const Tensor& context, std::size_t batch, std::size_t max_len) const;

 private:
  DecoderConfig config_;
  std::size_t heads_ = 1;
  nn::Embedding token_embedding_;
  std::vector<DecoderLayer> layers_;
  nn::Linear classifier_;
};

}  // namespace ttita
