#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ttita/tensor.hpp"

namespace ttita {

/// MurmurHash3 x86 32-bit.
std::uint32_t murmur3_32(std::span<const std::byte> data, std::uint32_t seed);
std::uint32_t murmur3_32(std::string_view data, std::uint32_t seed);

struct HashConfig {
  std::size_t dimension = 128;
  std::size_t min_ngram = 1;
  std::size_t max_ngram = 5;
  std::uint32_t seed = 0;
};

/// Character n-grams of the lowercased text, n in [min_ngram, max_ngram],
/// taken over code points with whitespace kept. Used by hash_features; exposed
/// for testing.
std::vector<std::string_view> char_ngrams(std::string_view lowered, std::size_t min_n, std::size_t max_n);

/// Signed feature hashing: each n-gram's hash h (as int32) adds sign(h) to
/// bucket |h| mod dimension; the result is L2-normalized (zero stays zero).
std::vector<real> hash_features(std::string_view text, const HashConfig& config);

}  // namespace ttita
