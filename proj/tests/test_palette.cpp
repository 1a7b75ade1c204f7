#include <array>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tactile/error.hpp"
#include "tactile/palette.hpp"

using namespace tactile;

namespace {

// Independent transcription of the class colors, in tie-break order.
constexpr std::array<std::array<int, 3>, 7> kColors = {{
    {255, 0, 255},    // Streets
    {255, 255, 0},    // Highways
    {0, 255, 0},      // Parks
    {0, 0, 255},      // Water
    {0, 255, 255},    // Buildings
    {128, 128, 128},  // Hospitals
    {255, 255, 255},  // Background
}};

int brute_force_class(int r, int g, int b) {
  int best = 0;
  int best_d = 1 << 30;
  for (int k = 0; k < 7; ++k) {
    const int d = std::abs(r - kColors[k][0]) + std::abs(g - kColors[k][1]) + std::abs(b - kColors[k][2]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best_d > 230 ? 6 : best;
}

}  // namespace

TEST_CASE("standard palette colors") {
  const auto p = ClassPalette::standard();
  CHECK(p.background_threshold() == 230);
  for (int k = 0; k < 7; ++k) {
    const Rgb c = p.color_of(static_cast<ClassId>(k));
    CHECK(c[0] == kColors[k][0]);
    CHECK(c[1] == kColors[k][1]);
    CHECK(c[2] == kColors[k][2]);
  }
}

TEST_CASE("classify_pixel matches brute force on random pixels") {
  const auto p = ClassPalette::standard();
  std::mt19937 gen(1234);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 20000; ++i) {
    const int r = byte(gen), g = byte(gen), b = byte(gen);
    const Rgb rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                  static_cast<std::uint8_t>(b)};
    REQUIRE(index_of(classify_pixel(rgb, p)) == brute_force_class(r, g, b));
  }
}

TEST_CASE("background threshold boundary") {
  const auto p = ClassPalette::standard();
  // Black is at least 255 from every entry.
  CHECK(classify_pixel({0, 0, 0}, p) == ClassId::Background);
  // Distance exactly 230 from Parks stays Parks; 231 falls to Background.
  CHECK(classify_pixel({0, 25, 0}, p) == ClassId::Parks);   // 230
  CHECK(classify_pixel({0, 24, 0}, p) == ClassId::Background);  // 231
  CHECK(classify_pixel({128, 128, 128}, p) == ClassId::Hospitals);
}

TEST_CASE("nearest color and tie breaking") {
  const auto p = ClassPalette::standard();
  CHECK(classify_pixel({255, 128, 128}, p) == ClassId::Hospitals);  // 127 vs 255
  CHECK(classify_pixel({128, 0, 255}, p) == ClassId::Streets);      // 127 vs Water 128
  CHECK(classify_pixel({255, 128, 255}, p) == ClassId::Background); // 127 vs Streets 128
  CHECK(classify_pixel({0, 128, 255}, p) == ClassId::Buildings);
  CHECK(classify_pixel({0, 127, 255}, p) == ClassId::Water);
  // (50,50,0) is 100 from both of the first two entries below; order decides.
  std::vector<PaletteEntry> entries = {
      {ClassId::Streets, "Streets", {100, 0, 0}},       {ClassId::Highways, "Highways", {0, 100, 0}},
      {ClassId::Parks, "Parks", {0, 0, 255}},           {ClassId::Water, "Water", {255, 255, 255}},
      {ClassId::Buildings, "Buildings", {255, 0, 255}}, {ClassId::Hospitals, "Hospitals", {0, 255, 255}},
      {ClassId::Background, "Background", {255, 255, 0}}};
  CHECK(classify_pixel({50, 50, 0}, ClassPalette(entries, 230)) == ClassId::Streets);
  std::swap(entries[0], entries[1]);
  CHECK(classify_pixel({50, 50, 0}, ClassPalette(entries, 230)) == ClassId::Highways);
}

TEST_CASE("segment and render round trip on palette images") {
  const auto p = ClassPalette::standard();
  RgbImage img(7, 3);
  for (int x = 0; x < 7; ++x) {
    for (int y = 0; y < 3; ++y) img.set(x, y, p.color_of(static_cast<ClassId>((x + y) % 7)));
  }
  const ClassMask m = segment_image(img, p);
  CHECK(m.at(2, 1) == static_cast<ClassId>(3));
  CHECK(render_mask(m, p) == img);
  CHECK(is_palette_pure(img, p));
  img.set(0, 0, {1, 2, 3});
  CHECK_FALSE(is_palette_pure(img, p));
}

TEST_CASE("palette file parsing") {
  const auto p = ClassPalette::parse("# custom\nwater = #0000fe\nthreshold = 100\n");
  CHECK(p.background_threshold() == 100);
  CHECK(p.color_of(ClassId::Water) == Rgb{0, 0, 254});
  CHECK(p.color_of(ClassId::Streets) == Rgb{255, 0, 255});
  CHECK_THROWS_AS(ClassPalette::parse("lava = ff0000\n"), Error);
  CHECK_THROWS_AS(ClassPalette::parse("water = 12345\n"), Error);
}

TEST_CASE("class names") {
  CHECK(class_name(ClassId::Hospitals) == "Hospitals");
  CHECK(class_from_name("water") == ClassId::Water);
  CHECK_FALSE(class_from_name("lava").has_value());
}

TEST_CASE("texturize paints one pattern per class") {
  const auto p = ClassPalette::standard();
  RgbImage img(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 8; ++x) img.set(x, y, p.color_of(ClassId::Water));
  }
  const auto out = texturize(img, p, default_texture_map());
  const auto tex = default_texture_map();
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const Rgb expected = (x < 8 && tex.at(ClassId::Water).inked(x, y)) ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
      REQUIRE(out.at(x, y) == expected);
    }
  }
  CHECK_THROWS_AS(parse_texture_map("background = hatch\n"), Error);
  CHECK_THROWS_AS(parse_texture_map("water = zigzag\n"), Error);
  const auto custom = parse_texture_map("water = solid\n");
  CHECK(custom.at(ClassId::Water).kind == PatternKind::Solid);
}
