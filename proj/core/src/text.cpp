#include "ttita/text.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "ttita/error.hpp"

namespace ttita {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (s.find(from) == std::string::npos) return;
  std::string out;
  out.reserve(s.size() + s.size() / 4);
  std::size_t pos = 0;
  while (true) {
    const auto hit = s.find(from, pos);
    if (hit == std::string::npos) break;
    out.append(s, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  out.append(s, pos, std::string::npos);
  s = std::move(out);
}

constexpr std::array<std::pair<std::string_view, std::string_view>, 11> kRules{{
    {"'", " ' "},
    {"\"", ""},
    {".", " . "},
    {"<br />", " "},
    {",", " , "},
    {"(", " ( "},
    {")", " ) "},
    {"!", " ! "},
    {"?", " ? "},
    {";", " "},
    {":", " "},
}};

constexpr std::array<std::string_view, Vocab::kNumSpecial> kSpecials{"[pad]", "[start]", "[end]", "[unk]"};

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& [from, to] : kRules) replace_all(s, from, to);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) tokens.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Vocab::Vocab() {
  for (auto s : kSpecials) {
    ids_.emplace(std::string(s), static_cast<int>(tokens_.size()));
    tokens_.emplace_back(s);
  }
}

Vocab Vocab::build(std::span<const std::string> texts, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts)
    for (auto& tok : tokenize(t)) ++counts[std::move(tok)];
  for (auto s : kSpecials) counts.erase(std::string(s));
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // std::map iteration is already lexicographic, so a stable sort by count
  // keeps ties in ascending order.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);
  Vocab v;
  for (auto& [tok, _] : ranked) {
    v.ids_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(std::move(tok));
  }
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kNumSpecial) throw FormatError("vocabulary lacks the reserved tokens");
  for (std::size_t i = 0; i < kNumSpecial; ++i) {
    if (tokens[i] != kSpecials[i]) throw FormatError("vocabulary id " + std::to_string(i) + " must be " + std::string(kSpecials[i]));
  }
  Vocab v;
  v.tokens_.clear();
  v.ids_.clear();
  for (auto& tok : tokens) {
    if (!v.ids_.emplace(tok, static_cast<int>(v.tokens_.size())).second) {
      throw FormatError("duplicate vocabulary token '" + tok + "'");
    }
    v.tokens_.push_back(std::move(tok));
  }
  return v;
}

int Vocab::id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ShapeError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> encode_sequence(std::string_view text, const Vocab& vocab, std::size_t max_len) {
  const auto tokens = tokenize(text);
  std::vector<int> ids{Vocab::kStart};
  const std::size_t n = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(vocab.id(tokens[i]));
  ids.push_back(Vocab::kEnd);
  return ids;
}

std::vector<std::string> decode_sequence(std::span<const int> ids, const Vocab& vocab) {
  std::vector<std::string> out;
  for (int id : ids)
    if (!Vocab::is_special(id)) out.push_back(vocab.token(id));
  return out;
}

}  // namespace ttita
