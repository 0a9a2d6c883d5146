#include "ttita/hashing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ttita/error.hpp"

namespace ttita {

std::uint32_t murmur3_32(std::span<const std::byte> data, std::uint32_t seed) {
  constexpr std::uint32_t c1 = 0xcc9e2d51, c2 = 0x1b873593;
  const std::size_t len = data.size();
  const std::size_t nblocks = len / 4;
  std::uint32_t h = seed;
  auto byte = [&](std::size_t i) { return static_cast<std::uint32_t>(std::to_integer<unsigned char>(data[i])); };
  for (std::size_t i = 0; i < nblocks; ++i) {
    std::uint32_t k = byte(4 * i) | (byte(4 * i + 1) << 8) | (byte(4 * i + 2) << 16) | (byte(4 * i + 3) << 24);
    k *= c1;
    k = std::rotl(k, 15);
    k *= c2;
    h ^= k;
    h = std::rotl(h, 13);
    h = h * 5 + 0xe6546b64;
  }
  std::uint32_t k = 0;
  const std::size_t tail = nblocks * 4;
  switch (len & 3) {
    case 3: k ^= byte(tail + 2) << 16; [[fallthrough]];
    case 2: k ^= byte(tail + 1) << 8; [[fallthrough]];
    case 1:
      k ^= byte(tail);
      k *= c1;
      k = std::rotl(k, 15);
      k *= c2;
      h ^= k;
  }
  h ^= static_cast<std::uint32_t>(len);
  h ^= h >> 16;
  h *= 0x85ebca6b;
  h ^= h >> 13;
  h *= 0xc2b2ae35;
  h ^= h >> 16;
  return h;
}

std::uint32_t murmur3_32(std::string_view data, std::uint32_t seed) {
  return murmur3_32(std::as_bytes(std::span<const char>(data.data(), data.size())), seed);
}

std::vector<std::string_view> char_ngrams(std::string_view lowered, std::size_t min_n, std::size_t max_n) {
  // Byte offsets of UTF-8 code point starts, plus the end.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < lowered.size(); ++i)
    if ((static_cast<unsigned char>(lowered[i]) & 0xC0) != 0x80) starts.push_back(i);
  const std::size_t n_chars = starts.size();
  starts.push_back(lowered.size());
  std::vector<std::string_view> grams;
  for (std::size_t n = min_n; n <= max_n; ++n) {
    if (n == 0 || n > n_chars) continue;
    for (std::size_t i = 0; i + n <= n_chars; ++i) grams.push_back(lowered.substr(starts[i], starts[i + n] - starts[i]));
  }
  return grams;
}

std::vector<real> hash_features(std::string_view text, const HashConfig& config) {
  if (config.dimension == 0) throw ConfigError("hash_features: dimension must be positive");
  if (config.min_ngram == 0 || config.min_ngram > config.max_ngram) throw ConfigError("hash_features: bad n-gram range");
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::vector<double> acc(config.dimension, 0.0);
  for (auto gram : char_ngrams(lowered, config.min_ngram, config.max_ngram)) {
    const auto h = static_cast<std::int32_t>(murmur3_32(gram, config.seed));
    const auto bucket = static_cast<std::size_t>(std::llabs(static_cast<long long>(h)) %
                                                 static_cast<long long>(config.dimension));
    acc[bucket] += h >= 0 ? 1.0 : -1.0;
  }
  double norm = 0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<real> out(config.dimension, real(0));
  if (norm > 0)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<real>(acc[i] / norm);
  return out;
}

}  // namespace ttita
