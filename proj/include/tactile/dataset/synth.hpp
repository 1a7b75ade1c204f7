#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tactile/map_pair.hpp"
#include "tactile/palette.hpp"

namespace tactile::dataset {

struct FractionRange {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double f) const noexcept { return f >= lo && f <= hi; }
};

// Knobs of the procedural map generator. Line features (streets, highways)
// have fixed pixel widths per zoom analog, so smaller images are windows at
// the same map scale; area features scale with the image.
struct SynthProfile {
  int size = 512;
  int zoom_analog = 16;
  bool include_buildings = false;
  // Accepted per-class pixel fraction for a drawn map, indexed by ClassId.
  std::array<FractionRange, kClassCount> class_fraction{};
  // Expected number of text labels / icons per 512x512 area.
  double text_density = 14.0;
  double icon_density = 8.0;
  std::uint64_t seed = 0;
  int max_attempts = 64;

  void validate() const;
};

// Profile for a zoom level: buildings on from zoom 17, unconstrained ranges.
SynthProfile default_synth_profile(int zoom_analog, int size = 512, std::uint64_t seed = 0);

struct Polyline {
  std::vector<std::array<double, 2>> points;
  double width = 1.0;
};

struct SynthResult {
  MapPair pair;
  ClassMask labels;
  std::vector<Polyline> streets;  // street centerlines in pixel coordinates
  int attempts = 1;
};

// Draws a map and renders the aligned source (styled, with labels and icons)
// and tactile (palette colors only) views. Throws Infeasible when no draw in
// max_attempts meets the fraction ranges.
SynthResult synth_pair(const SynthProfile& profile);

// Pair `index` of a synthetic dataset: seeded from (seed, index).
SynthResult synth_indexed(SynthProfile profile, std::uint64_t seed, int index);
std::string synth_id(int zoom, int index);

std::array<double, kClassCount> class_fractions(const ClassMask& mask);

// Source-view fill colors of each class, indexed by ClassId.
const std::array<Rgb, kClassCount>& source_style_colors();

}  // namespace tactile::dataset
