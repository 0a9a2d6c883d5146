#include "ttita/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "ttita/error.hpp"
#include "ttita/io.hpp"

namespace ttita {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::string_view in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return v;
}

void put_f32(std::string& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

float get_f32(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

Checkpoint Checkpoint::from_model(const TtitaModel& model, nlohmann::json training) {
  Checkpoint c;
  c.schema = model.schema();
  c.vocab = model.vocab();
  c.preprocessing = model.preprocessing();
  c.hyperparameters = model.hyperparameters();
  c.training = std::move(training);
  for (const auto& [name, t] : model.parameters().entries()) {
    NamedTensor nt{name, t.shape(), {}};
    nt.values.reserve(t.size());
    for (real v : t.data()) nt.values.push_back(static_cast<float>(v));
    c.tensors.push_back(std::move(nt));
  }
  return c;
}

TtitaModel Checkpoint::instantiate() const {
  TtitaModel model(schema, preprocessing, vocab, hyperparameters);
  const auto& entries = model.parameters().entries();
  if (entries.size() != tensors.size()) {
    throw FormatError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                      std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [name, param] = entries[i];
    const auto& stored = tensors[i];
    if (stored.name != name || stored.shape != param.shape()) {
      throw FormatError("checkpoint tensor '" + stored.name + "' " + to_string(stored.shape) +
                        " does not match model parameter '" + name + "' " + to_string(param.shape()));
    }
    auto dst = Tensor(param).mutable_data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = static_cast<real>(stored.values[j]);
  }
  return model;
}

nlohmann::json Checkpoint::manifest() const {
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    const std::uint64_t nbytes = t.values.size() * sizeof(float);
    index.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  const auto pre = preprocessing.to_json();
  return {{"format", std::string(kMagic)},
          {"schema", schema.to_json()},
          {"vocab", vocab.tokens()},
          {"numeric_stats", pre.at("numeric_stats")},
          {"category_maps", pre.at("category_maps")},
          {"hyperparameters", hyperparameters.to_json()},
          {"tensors", index},
          {"training", training}};
}

std::string Checkpoint::serialize() const {
  const std::string header = manifest().dump();
  std::string out(kMagic);
  put_u64(out, header.size());
  out += header;
  for (const auto& t : tensors)
    for (float v : t.values) put_f32(out, v);
  return out;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("not a TTITA1 checkpoint (bad magic)");
  }
  const std::uint64_t len = get_u64(bytes.substr(kMagic.size(), 8));
  const std::size_t header_start = kMagic.size() + 8;
  if (len > bytes.size() - header_start) throw FormatError("checkpoint manifest truncated");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(bytes.substr(header_start, len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }
  const std::string_view payload = bytes.substr(header_start + len);
  Checkpoint c;
  try {
    c.schema = Schema::from_json(m.at("schema"));
    c.vocab = Vocab::from_tokens(m.at("vocab").get<std::vector<std::string>>());
    c.preprocessing = Preprocessing::from_json({{"numeric_stats", m.at("numeric_stats")}, {"category_maps", m.at("category_maps")}});
    c.hyperparameters = Hyperparameters::from_json(m.at("hyperparameters"));
    c.training = m.value("training", nlohmann::json::object());
    std::uint64_t expected_offset = 0;
    for (const auto& e : m.at("tensors")) {
      NamedTensor t{e.at("name").get<std::string>(), e.at("shape").get<Shape>(), {}};
      const auto offset = e.at("offset").get<std::uint64_t>();
      const auto nbytes = e.at("nbytes").get<std::uint64_t>();
      if (nbytes != numel(t.shape) * sizeof(float)) {
        throw FormatError("tensor '" + t.name + "' shape " + to_string(t.shape) + " disagrees with " +
                          std::to_string(nbytes) + " payload bytes");
      }
      if (offset != expected_offset || offset + nbytes > payload.size()) {
        throw FormatError("tensor '" + t.name + "' lies outside the payload");
      }
      t.values.resize(numel(t.shape));
      for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = get_f32(payload.data() + offset + 4 * i);
      expected_offset += nbytes;
      c.tensors.push_back(std::move(t));
    }
    if (expected_offset != payload.size()) throw FormatError("checkpoint payload has trailing bytes");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest is incomplete: ") + e.what());
  }
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

Checkpoint Checkpoint::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

}  // namespace ttita
