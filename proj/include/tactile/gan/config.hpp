#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace tactile::gan {

enum class NormKind { Instance, None };

std::string to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& text);

struct GeneratorConfig {
  int in_channels = 3;
  int out_channels = 3;
  int depth = 5;
  int base_channels = 64;
  int max_channels = 512;
  bool nested = true;  // false wires a plain U-Net (one decoder node per level)
  NormKind norm = NormKind::Instance;

  int channels(int level) const;
  // Spatial sizes must be multiples of this.
  int size_multiple() const noexcept { return 1 << (depth - 1); }
  void validate() const;
  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

struct DiscriminatorConfig {
  int in_channels = 6;
  int base_channels = 64;
  int max_channels = 512;
  int stride2_layers = 3;
  NormKind norm = NormKind::Instance;

  int channels(int layer) const;
  void validate() const;
  friend bool operator==(const DiscriminatorConfig&, const DiscriminatorConfig&) = default;
};

// Trainable parameter totals computed from the configuration alone.
std::int64_t count_params(const GeneratorConfig& cfg);
std::int64_t count_params(const DiscriminatorConfig& cfg);

nlohmann::json to_json(const GeneratorConfig& cfg);
nlohmann::json to_json(const DiscriminatorConfig& cfg);
GeneratorConfig generator_config_from_json(const nlohmann::json& j);
DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j);

}  // namespace tactile::gan
