#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ttita/model.hpp"

namespace ttita {

/// Everything inference needs: schema, vocabulary, fill/scaling statistics,
/// hyperparameters and weights.
///
/// File layout (all integers little-endian):
///   bytes 0..5   magic "TTITA1"
///   bytes 6..13  uint64 manifest length L
///   next L bytes manifest, compact UTF-8 JSON
///   remainder    weight payload: tensors in manifest order, each as
///                row-major IEEE-754 binary32
/// The manifest's "tensors" array lists {name, shape, offset, nbytes} with
/// offsets relative to the start of the payload.
struct Checkpoint {
  static constexpr std::string_view kMagic = "TTITA1";

  struct NamedTensor {
    std::string name;
    Shape shape;
    std::vector<float> values;
    bool operator==(const NamedTensor&) const = default;
  };

  Schema schema;
  Vocab vocab;
  Preprocessing preprocessing;
  Hyperparameters hyperparameters;
  std::vector<NamedTensor> tensors;
  /// Per-epoch losses and the selected epoch.
  nlohmann::json training = nlohmann::json::object();

  static Checkpoint from_model(const TtitaModel& model, nlohmann::json training = nlohmann::json::object());
  /// Rebuilds the model and loads the stored weights into it.
  TtitaModel instantiate() const;

  nlohmann::json manifest() const;
  std::string serialize() const;
  static Checkpoint deserialize(std::string_view bytes);

  /// Atomic write.
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace ttita
