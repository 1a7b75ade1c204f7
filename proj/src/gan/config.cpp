#include "tactile/gan/config.hpp"

#include <algorithm>

#include "tactile/error.hpp"
#include "tactile/kv_config.hpp"

namespace tactile::gan {

std::string to_string(NormKind kind) { return kind == NormKind::Instance ? "instance" : "none"; }

NormKind parse_norm_kind(const std::string& text) {
  const std::string t = to_lower(trim(text));
  if (t == "instance") return NormKind::Instance;
  if (t == "none") return NormKind::None;
  throw Error(ErrorKind::Config, "unknown norm kind '" + text + "' (expected instance|none)");
}

int GeneratorConfig::channels(int level) const {
  long c = base_channels;
  for (int i = 0; i < level && c < max_channels; ++i) c *= 2;
  return static_cast<int>(std::min<long>(c, max_channels));
}

void GeneratorConfig::validate() const {
  if (in_channels < 1 || out_channels < 1) {
    throw Error(ErrorKind::Config, "generator channel counts must be positive");
  }
  if (depth < 1 || depth > 10) throw Error(ErrorKind::Config, "generator depth must be in 1..10");
  if (base_channels < 1 || max_channels < base_channels) {
    throw Error(ErrorKind::Config, "generator needs 1 <= base_channels <= max_channels");
  }
}

int DiscriminatorConfig::channels(int layer) const {
  long c = base_channels;
  for (int i = 0; i < layer && c < max_channels; ++i) c *= 2;
  return static_cast<int>(std::min<long>(c, max_channels));
}

void DiscriminatorConfig::validate() const {
  if (in_channels < 2 || in_channels % 2 != 0) {
    throw Error(ErrorKind::Config, "discriminator input channels must be an even count >= 2");
  }
  if (base_channels < 1 || max_channels < base_channels) {
    throw Error(ErrorKind::Config, "discriminator needs 1 <= base_channels <= max_channels");
  }
  if (stride2_layers < 1) throw Error(ErrorKind::Config, "discriminator needs a stride-2 layer");
}

namespace {

std::int64_t conv_params(std::int64_t in, std::int64_t out, std::int64_t k) {
  return in * out * k * k + out;
}

std::int64_t block_params(std::int64_t in, std::int64_t out, bool norm) {
  return conv_params(in, out, 3) + conv_params(out, out, 3) + (norm ? 4 * out : 0);
}

}  // namespace

std::int64_t count_params(const GeneratorConfig& cfg) {
  cfg.validate();
  const bool norm = cfg.norm == NormKind::Instance;
  const int d = cfg.depth;
  std::int64_t total = 0;
  for (int i = 0; i < d; ++i) {
    total += block_params(i == 0 ? cfg.in_channels : cfg.channels(i - 1), cfg.channels(i), norm);
  }
  for (int j = 1; j < d; ++j) {
    for (int i = 0; i + j < d; ++i) {
      if (!cfg.nested && i + j != d - 1) continue;
      const std::int64_t c = cfg.channels(i);
      const std::int64_t skips = cfg.nested ? j : 1;
      total += conv_params(cfg.channels(i + 1), c, 2);  // transposed upsampler
      total += block_params(skips * c + c, c, norm);
    }
  }
  total += conv_params(cfg.channels(0), cfg.out_channels, 1);
  return total;
}

std::int64_t count_params(const DiscriminatorConfig& cfg) {
  cfg.validate();
  const bool norm = cfg.norm == NormKind::Instance;
  std::int64_t total = 0;
  std::int64_t in = cfg.in_channels;
  for (int l = 0; l <= cfg.stride2_layers; ++l) {
    const std::int64_t out = cfg.channels(l);
    total += conv_params(in, out, 4);
    if (norm && l > 0) total += 2 * out;
    in = out;
  }
  total += conv_params(in, 1, 4);
  return total;
}

nlohmann::json to_json(const GeneratorConfig& cfg) {
  return {{"in_channels", cfg.in_channels},     {"out_channels", cfg.out_channels},
          {"depth", cfg.depth},                 {"base_channels", cfg.base_channels},
          {"max_channels", cfg.max_channels},   {"nested", cfg.nested},
          {"norm", to_string(cfg.norm)}};
}

nlohmann::json to_json(const DiscriminatorConfig& cfg) {
  return {{"in_channels", cfg.in_channels},
          {"base_channels", cfg.base_channels},
          {"max_channels", cfg.max_channels},
          {"stride2_layers", cfg.stride2_layers},
          {"norm", to_string(cfg.norm)}};
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  try {
    GeneratorConfig c;
    c.in_channels = j.at("in_channels").get<int>();
    c.out_channels = j.at("out_channels").get<int>();
    c.depth = j.at("depth").get<int>();
    c.base_channels = j.at("base_channels").get<int>();
    c.max_channels = j.at("max_channels").get<int>();
    c.nested = j.at("nested").get<bool>();
    c.norm = parse_norm_kind(j.at("norm").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Checkpoint, std::string("bad generator config: ") + e.what());
  }
}

DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j) {
  try {
    DiscriminatorConfig c;
    c.in_channels = j.at("in_channels").get<int>();
    c.base_channels = j.at("base_channels").get<int>();
    c.max_channels = j.at("max_channels").get<int>();
    c.stride2_layers = j.at("stride2_layers").get<int>();
    c.norm = parse_norm_kind(j.at("norm").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Checkpoint, std::string("bad discriminator config: ") + e.what());
  }
}

}  // namespace tactile::gan
