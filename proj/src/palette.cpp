#include "tactile/palette.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "tactile/error.hpp"
#include "tactile/kv_config.hpp"

namespace tactile {

namespace {

constexpr std::array<std::string_view, kClassCount> kNames = {
    "Streets", "Highways", "Parks", "Water", "Buildings", "Hospitals", "Background"};

Rgb parse_hex_color(std::string_view key, std::string_view value) {
  std::string_view v = value;
  if (!v.empty() && v.front() == '#') v.remove_prefix(1);
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) v.remove_prefix(2);
  if (v.size() != 6) {
    throw Error(ErrorKind::Config, std::string(key) + ": expected 6-digit hex color, got `" +
                                       std::string(value) + "`");
  }
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    unsigned int channel = 0;
    auto sub = v.substr(static_cast<std::size_t>(c) * 2, 2);
    auto [ptr, ec] = std::from_chars(sub.data(), sub.data() + 2, channel, 16);
    if (ec != std::errc{} || ptr != sub.data() + 2) {
      throw Error(ErrorKind::Config, std::string(key) + ": invalid hex color `" +
                                         std::string(value) + "`");
    }
    out[c] = static_cast<std::uint8_t>(channel);
  }
  return out;
}

}  // namespace

std::string_view class_name(ClassId id) noexcept { return kNames[index_of(id)]; }

std::optional<ClassId> class_from_name(std::string_view name) noexcept {
  const std::string lowered = to_lower(trim(name));
  for (int i = 0; i < kClassCount; ++i) {
    if (to_lower(kNames[i]) == lowered) return static_cast<ClassId>(i);
  }
  return std::nullopt;
}

ClassPalette ClassPalette::standard() {
  return ClassPalette(
      {
          {ClassId::Streets, "Streets", {255, 0, 255}},
          {ClassId::Highways, "Highways", {255, 255, 0}},
          {ClassId::Parks, "Parks", {0, 255, 0}},
          {ClassId::Water, "Water", {0, 0, 255}},
          {ClassId::Buildings, "Buildings", {0, 255, 255}},
          {ClassId::Hospitals, "Hospitals", {128, 128, 128}},
          {ClassId::Background, "Background", {255, 255, 255}},
      },
      kDefaultBackgroundThreshold);
}

ClassPalette::ClassPalette(std::vector<PaletteEntry> entries, int background_threshold)
    : entries_(std::move(entries)), threshold_(background_threshold) {
  if (entries_.size() != static_cast<std::size_t>(kClassCount)) {
    throw Error(ErrorKind::Config, "palette needs exactly 7 entries (6 classes + Background)");
  }
  std::array<bool, kClassCount> seen{};
  for (const auto& e : entries_) {
    if (seen[index_of(e.id)]) {
      throw Error(ErrorKind::Config, "palette lists " + e.name + " twice");
    }
    seen[index_of(e.id)] = true;
    by_class_[index_of(e.id)] = e.rgb;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      if (entries_[i].rgb == entries_[j].rgb) {
        throw Error(ErrorKind::Config, "palette colors of " + entries_[i].name + " and " +
                                           entries_[j].name + " coincide");
      }
    }
  }
  if (threshold_ < 0) throw Error(ErrorKind::Config, "background threshold must be >= 0");
}

ClassPalette ClassPalette::parse(std::string_view text) {
  auto base = standard();
  std::vector<PaletteEntry> entries = base.entries();
  int threshold = base.background_threshold();
  for (const auto& [key, value] : parse_key_values(text)) {
    if (to_lower(key) == "threshold") {
      threshold = parse_int(key, value);
      continue;
    }
    auto id = class_from_name(key);
    if (!id) throw Error(ErrorKind::Config, "unknown palette key `" + key + "`");
    for (auto& e : entries) {
      if (e.id == *id) e.rgb = parse_hex_color(key, value);
    }
  }
  return ClassPalette(std::move(entries), threshold);
}

ClassPalette ClassPalette::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

ClassMask::ClassMask(int width, int height, ClassId fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::Shape, "mask dimensions must be positive");
  }
  labels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

std::size_t ClassMask::count(ClassId id) const noexcept {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), id));
}

ClassId classify_pixel(Rgb rgb, const ClassPalette& palette) noexcept {
  int best = std::numeric_limits<int>::max();
  ClassId best_id = ClassId::Background;
  for (const auto& e : palette.entries()) {
    const int d = l1_distance(rgb, e.rgb);
    if (d < best) {
      best = d;
      best_id = e.id;
    }
  }
  return best > palette.background_threshold() ? ClassId::Background : best_id;
}

ClassMask segment_image(const RgbImage& image, const ClassPalette& palette) {
  ClassMask mask(image.width(), image.height());
  const int h = image.height();
  const int w = image.width();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) mask.set(x, y, classify_pixel(image.at(x, y), palette));
  }
  return mask;
}

RgbImage render_mask(const ClassMask& mask, const ClassPalette& palette) {
  RgbImage image(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) image.set(x, y, palette.color_of(mask.at(x, y)));
  }
  return image;
}

bool is_palette_pure(const RgbImage& image, const ClassPalette& palette) {
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb c = image.at(x, y);
      const bool member = std::any_of(palette.entries().begin(), palette.entries().end(),
                                      [&](const PaletteEntry& e) { return e.rgb == c; });
      if (!member) return false;
    }
  }
  return true;
}

bool FillPattern::inked(int x, int y) const noexcept {
  const int p = std::max(period, 1);
  auto mod = [p](int v) { return ((v % p) + p) % p; };
  switch (kind) {
    case PatternKind::Solid: return true;
    case PatternKind::Blank: return false;
    case PatternKind::Hatch: return mod(x + y) == 0;
    case PatternKind::DotGrid: return mod(x) == 0 && mod(y) == 0;
    case PatternKind::CrossHatch: return mod(x + y) == 0 || mod(x - y) == 0;
  }
  return false;
}

TextureMap default_texture_map() {
  return {
      {ClassId::Streets, {PatternKind::Solid, 1}},
      {ClassId::Highways, {PatternKind::CrossHatch, 3}},
      {ClassId::Parks, {PatternKind::Hatch, 4}},
      {ClassId::Water, {PatternKind::DotGrid, 4}},
      {ClassId::Buildings, {PatternKind::CrossHatch, 6}},
      {ClassId::Hospitals, {PatternKind::DotGrid, 2}},
  };
}

TextureMap parse_texture_map(std::string_view text) {
  TextureMap out = default_texture_map();
  for (const auto& [key, value] : parse_key_values(text)) {
    auto id = class_from_name(key);
    if (!id) throw Error(ErrorKind::Config, "texture map names unknown class `" + key + "`");
    if (*id == ClassId::Background) {
      throw Error(ErrorKind::Config, "texture map cannot assign a pattern to Background");
    }
    std::string kind_name = to_lower(value);
    FillPattern pattern;
    if (auto colon = kind_name.find(':'); colon != std::string::npos) {
      pattern.period = parse_int(key, trim(std::string_view(kind_name).substr(colon + 1)));
      if (pattern.period < 1) throw Error(ErrorKind::Config, key + ": period must be >= 1");
      kind_name = trim(std::string_view(kind_name).substr(0, colon));
    }
    if (kind_name == "solid") pattern.kind = PatternKind::Solid;
    else if (kind_name == "hatch") pattern.kind = PatternKind::Hatch;
    else if (kind_name == "dots" || kind_name == "dot-grid") pattern.kind = PatternKind::DotGrid;
    else if (kind_name == "crosshatch" || kind_name == "cross-hatch") pattern.kind = PatternKind::CrossHatch;
    else if (kind_name == "blank") pattern.kind = PatternKind::Blank;
    else throw Error(ErrorKind::Config, key + ": unknown pattern `" + value + "`");
    out[*id] = pattern;
  }
  return out;
}

RgbImage texturize(const RgbImage& tactile, const ClassPalette& palette,
                   const TextureMap& textures) {
  std::array<std::optional<FillPattern>, kClassCount> lookup;
  for (const auto& [id, pattern] : textures) {
    if (id == ClassId::Background) {
      throw Error(ErrorKind::Config, "texture map cannot assign a pattern to Background");
    }
    lookup[index_of(id)] = pattern;
  }
  for (ClassId id : kFeatureClasses) {
    if (!lookup[index_of(id)]) {
      throw Error(ErrorKind::Config,
                  "texture map has no pattern for " + std::string(class_name(id)));
    }
  }
  RgbImage out(tactile.width(), tactile.height());
  const int h = tactile.height();
  const int w = tactile.width();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const ClassId id = classify_pixel(tactile.at(x, y), palette);
      if (id == ClassId::Background) continue;
      if (lookup[index_of(id)]->inked(x, y)) out.set(x, y, {0, 0, 0});
    }
  }
  return out;
}

}  // namespace tactile
