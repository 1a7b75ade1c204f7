#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tactile/image.hpp"

namespace tactile {

// The six tactile feature classes plus background. The numeric values index
// every per-class array in the project.
enum class ClassId : std::uint8_t {
  Streets = 0,
  Highways = 1,
  Parks = 2,
  Water = 3,
  Buildings = 4,
  Hospitals = 5,
  Background = 6,
};

inline constexpr int kFeatureClassCount = 6;
inline constexpr int kClassCount = 7;
inline constexpr int kDefaultBackgroundThreshold = 230;

inline constexpr std::array<ClassId, kFeatureClassCount> kFeatureClasses = {
    ClassId::Streets, ClassId::Highways,  ClassId::Parks,
    ClassId::Water,   ClassId::Buildings, ClassId::Hospitals};

constexpr int index_of(ClassId id) noexcept { return static_cast<int>(id); }

std::string_view class_name(ClassId id) noexcept;
// Case-insensitive lookup of a display name ("Streets", "water", ...).
std::optional<ClassId> class_from_name(std::string_view name) noexcept;

struct PaletteEntry {
  ClassId id;
  std::string name;
  Rgb rgb;
};

// Ordered class-to-color binding. Order matters: it breaks argmin ties.
class ClassPalette {
 public:
  // Streets, Highways, Parks, Water, Buildings, Hospitals, Background with the
  // colors used by the tactile map style.
  static ClassPalette standard();

  // Parses `key = value` lines: class names map to 6-digit hex colors
  // (optionally prefixed by '#' or '0x'); `threshold` sets the background
  // threshold. Unlisted classes keep their standard color.
  static ClassPalette parse(std::string_view text);
  static ClassPalette load(const std::filesystem::path& path);

  ClassPalette(std::vector<PaletteEntry> entries, int background_threshold);

  const std::vector<PaletteEntry>& entries() const noexcept { return entries_; }
  int background_threshold() const noexcept { return threshold_; }
  Rgb color_of(ClassId id) const noexcept { return by_class_[index_of(id)]; }

 private:
  std::vector<PaletteEntry> entries_;
  std::array<Rgb, kClassCount> by_class_{};
  int threshold_ = kDefaultBackgroundThreshold;
};

class ClassMask {
 public:
  ClassMask() = default;
  ClassMask(int width, int height, ClassId fill = ClassId::Background);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return labels_.size(); }

  ClassId at(int x, int y) const noexcept {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  void set(int x, int y, ClassId id) noexcept {
    labels_[static_cast<std::size_t>(y) * width_ + x] = id;
  }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  std::vector<ClassId>& labels() noexcept { return labels_; }

  std::size_t count(ClassId id) const noexcept;

  friend bool operator==(const ClassMask&, const ClassMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<ClassId> labels_;
};

// Sum of per-channel absolute differences, 0..765.
constexpr int l1_distance(Rgb a, Rgb b) noexcept {
  int d = 0;
  for (int c = 0; c < 3; ++c) {
    const int diff = static_cast<int>(a[c]) - static_cast<int>(b[c]);
    d += diff < 0 ? -diff : diff;
  }
  return d;
}

// Nearest palette color under L1; first entry wins ties. A minimum distance
// above the background threshold yields Background.
ClassId classify_pixel(Rgb rgb, const ClassPalette& palette) noexcept;

ClassMask segment_image(const RgbImage& image, const ClassPalette& palette);
RgbImage render_mask(const ClassMask& mask, const ClassPalette& palette);

// True when every pixel equals some palette color exactly.
bool is_palette_pure(const RgbImage& image, const ClassPalette& palette);

enum class PatternKind { Solid, Hatch, DotGrid, CrossHatch, Blank };

struct FillPattern {
  PatternKind kind = PatternKind::Solid;
  int period = 4;

  // True where the pattern paints black at absolute image coordinate (x, y).
  bool inked(int x, int y) const noexcept;
};

using TextureMap = std::map<ClassId, FillPattern>;

// One distinct pattern per feature class, black on white.
TextureMap default_texture_map();

// Parses `class = pattern[:period]` lines, e.g. `water = dots:4`. Pattern
// names: solid, hatch, dots, crosshatch, blank. Entries override the default
// map. Unknown classes, Background and unknown patterns are config errors.
TextureMap parse_texture_map(std::string_view text);

// Replaces every classified pixel by its class pattern; Background is white.
// Throws a config error when the map names Background.
RgbImage texturize(const RgbImage& tactile, const ClassPalette& palette,
                   const TextureMap& textures);

}  // namespace tactile
