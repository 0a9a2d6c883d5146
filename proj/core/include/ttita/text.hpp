#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ttita {

/// Lowercases, pads punctuation with spaces, strips a few characters and
/// "<br />", then splits on whitespace. Mirrors torchtext's "basic_english"
/// normalization.
std::vector<std::string> tokenize(std::string_view text);

/// Tokens joined by single spaces.
std::string join_tokens(std::span<const std::string> tokens);

/// Token <-> id bijection. Ids 0..3 are the reserved [pad], [start], [end]
/// and [unk] tokens; corpus tokens follow by descending frequency (ties in
/// ascending byte order).
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kStart = 1;
  static constexpr int kEnd = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumSpecial = 4;
  static constexpr std::size_t kDefaultMaxSize = 20000;

  Vocab();

  /// Top `max_size` corpus tokens of the tokenized `texts`, plus specials.
  static Vocab build(std::span<const std::string> texts, std::size_t max_size = kDefaultMaxSize);
  /// Rebuilds from an id-ordered token list (as stored in checkpoints).
  static Vocab from_tokens(std::vector<std::string> tokens);

  /// Id of `token`, or kUnk.
  int id(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  static bool is_special(int id) { return id >= 0 && id < kNumSpecial; }

  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// [start] + ids of the first `max_len` tokens (unknown -> [unk]) + [end].
std::vector<int> encode_sequence(std::string_view text, const Vocab& vocab, std::size_t max_len);

/// Tokens for `ids`, skipping special ids.
std::vector<std::string> decode_sequence(std::span<const int> ids, const Vocab& vocab);

}  // namespace ttita
