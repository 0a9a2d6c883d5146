#include "ttita/decoder.hpp"

#include <algorithm>

#include "ttita/error.hpp"
#include "ttita/text.hpp"

namespace ttita {

std::size_t resolve_heads(std::size_t requested, std::size_t d_model) {
  if (d_model == 0 || d_model % 2 != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " must be even for rotary position encoding");
  }
  for (std::size_t h = std::max<std::size_t>(requested, 1); h >= 1; --h) {
    if (d_model % h == 0 && (d_model / h) % 2 == 0) return h;
  }
  return 1;
}

Tensor SelfAttention::operator()(const Tensor& x, std::size_t batch, std::size_t seq_len,
                                 ops::AttentionWeights* probe) const {
  const Tensor q = ops::rope(query(x), seq_len, heads);
  const Tensor k = ops::rope(key(x), seq_len, heads);
  const Tensor v = value(x);
  return output(ops::attention(q, k, v, batch, heads, /*causal=*/true, probe));
}

std::pair<Tensor, Tensor> CrossAttention::memory(const Tensor& context) const {
  const std::size_t b = context.rows(), d = context.cols();
  const Tensor chunks = memory_chunks == 1 ? context : ops::reshape(context, {b * memory_chunks, d / memory_chunks});
  return {key(chunks), value(chunks)};
}

Tensor CrossAttention::operator()(const Tensor& x, const std::pair<Tensor, Tensor>& mem, std::size_t batch,
                                  ops::AttentionWeights* probe) const {
  return output(ops::attention(query(x), mem.first, mem.second, batch, heads, /*causal=*/false, probe));
}

Tensor FeedForward::operator()(const Tensor& x) const { return down(ops::silu(up(x))); }

Tensor DecoderLayer::operator()(const Tensor& x, const std::pair<Tensor, Tensor>* memory, std::size_t batch,
                                std::size_t seq_len, double dropout, bool training, Rng& rng,
                                DecoderProbe* probe) const {
  ops::AttentionWeights* self_probe = nullptr;
  if (probe) self_probe = &probe->self_attention.emplace_back();
  Tensor h = ops::add(x, ops::dropout(self_attention(ops::rmsnorm(x, norm_self), batch, seq_len, self_probe), dropout,
                                      rng, training));
  if (cross_attention) {
    if (memory == nullptr) throw ConfigError("decoder layer needs a context vector for cross-attention");
    ops::AttentionWeights* cross_probe = nullptr;
    if (probe) cross_probe = &probe->cross_attention.emplace_back();
    const Tensor c = (*cross_attention)(ops::rmsnorm(h, norm_cross), *memory, batch, cross_probe);
    if (probe) probe->cross_output.push_back(c);
    h = ops::add(h, ops::dropout(c, dropout, rng, training));
  }
  return ops::add(h, ops::dropout(feed_forward(h), dropout, rng, training));
}

Decoder::Decoder(const DecoderConfig& config, nn::ParameterSet& params, Rng& rng) : config_(config) {
  if (config.d_model == 0 || config.vocab_size == 0 || config.num_layers == 0 || config.ffn_hidden == 0) {
    throw ConfigError("decoder dimensions must be positive");
  }
  if (config.memory_chunks == 0 || config.d_model % config.memory_chunks != 0) {
    throw ConfigError("memory_chunks must divide d_model (" + std::to_string(config.d_model) + ")");
  }
  heads_ = resolve_heads(config.num_heads, config.d_model);
  const std::size_t d = config.d_model;
  token_embedding_ = nn::Embedding::create(params, "decoder.token_embedding", config.vocab_size, d, rng);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const std::string p = "decoder.layer" + std::to_string(l);
    DecoderLayer layer;
    layer.norm_self = params.add(p + ".norm_self", Tensor::full({d}, real(1)));
    layer.self_attention = {nn::Linear::create(params, p + ".self.query", d, d, rng),
                            nn::Linear::create(params, p + ".self.key", d, d, rng),
                            nn::Linear::create(params, p + ".self.value", d, d, rng),
                            nn::Linear::create(params, p + ".self.output", d, d, rng), heads_};
    if (config.cross_attention) {
      const std::size_t mem = d / config.memory_chunks;
      layer.norm_cross = params.add(p + ".norm_cross", Tensor::full({d}, real(1)));
      layer.cross_attention = CrossAttention{nn::Linear::create(params, p + ".cross.query", d, d, rng),
                                             nn::Linear::create(params, p + ".cross.key", mem, d, rng),
                                             nn::Linear::create(params, p + ".cross.value", mem, d, rng),
                                             nn::Linear::create(params, p + ".cross.output", d, d, rng), heads_,
                                             config.memory_chunks};
    }
    layer.feed_forward = {nn::Linear::create(params, p + ".ffn.up", d, config.ffn_hidden, rng),
                          nn::Linear::create(params, p + ".ffn.down", config.ffn_hidden, d, rng)};
    layers_.push_back(std::move(layer));
  }
  classifier_ = nn::Linear::create(params, "decoder.classifier", d, config.vocab_size, rng);
}

Tensor Decoder::forward(const TokenBatch& tokens, const Tensor& context, bool training, Rng& rng,
                        DecoderProbe* probe) const {
  if (tokens.batch == 0 || tokens.seq_len == 0 || tokens.ids.size() != tokens.batch * tokens.seq_len) {
    throw ShapeError("decoder: token batch is empty or inconsistent");
  }
  if (config_.cross_attention) {
    if (!context.defined() || context.rank() != 2 || context.dim(0) != tokens.batch ||
        context.dim(1) != config_.d_model) {
      throw ShapeError("decoder: context must be [" + std::to_string(tokens.batch) + "," +
                       std::to_string(config_.d_model) + "]" +
                       (context.defined() ? ", got " + to_string(context.shape()) : std::string(", got none")));
    }
  }
  Tensor h = token_embedding_(tokens.ids);
  for (const auto& layer : layers_) {
    std::optional<std::pair<Tensor, Tensor>> layer_memory;
    if (layer.cross_attention) layer_memory = layer.cross_attention->memory(context);
    h = layer(h, layer_memory ? &*layer_memory : nullptr, tokens.batch, tokens.seq_len, config_.dropout, training, rng,
              probe);
  }
  return classifier_(ops::dropout(h, config_.dropout, rng, training));
}

std::vector<std::vector<int>> Decoder::generate(const Tensor& context, std::size_t batch, std::size_t max_len) const {
  NoGradGuard guard;
  if (config_.cross_attention) batch = context.dim(0);
  if (batch == 0) return {};
  std::vector<std::vector<int>> seqs(batch, std::vector<int>{Vocab::kStart});
  std::vector<std::vector<int>> out(batch);
  std::vector<bool> done(batch, false);
  Rng unused(0);
  for (std::size_t step = 0; step < max_len; ++step) {
    TokenBatch tb{batch, step + 1, {}};
    tb.ids.reserve(batch * (step + 1));
    for (const auto& s : seqs) tb.ids.insert(tb.ids.end(), s.begin(), s.end());
    const Tensor logits = forward(tb, context, /*training=*/false, unused);
    const std::size_t v = config_.vocab_size;
    bool all_done = true;
    for (std::size_t b = 0; b < batch; ++b) {
      if (done[b]) {
        seqs[b].push_back(Vocab::kPad);
        continue;
      }
      const real* row = logits.data().data() + (b * tb.seq_len + step) * v;
      const int next = static_cast<int>(std::max_element(row, row + v) - row);
      seqs[b].push_back(next);
      if (next == Vocab::kEnd) {
        done[b] = true;
      } else {
        out[b].push_back(next);
        all_done = false;
      }
    }
    if (all_done) break;
  }
  return out;
}

}  // namespace ttita
