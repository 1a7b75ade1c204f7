#pragma once

#include <cstdint>
#include <vector>

#include "tactile/image.hpp"
#include "tactile/map_pair.hpp"
#include "tactile/palette.hpp"
#include "tactile/random.hpp"

namespace tactile::augment {

struct AugmentParams {
  double hflip_prob = 0.5;
  double max_shift = 0.1;  // fraction of the side, per axis
  double scale_lo = 0.9;
  double scale_hi = 1.1;
  double max_rotation_deg = 15.0;
  double grey_recolor_prob = 0.5;
  Rgb grey_value{200, 200, 200};
  std::uint64_t seed = 0;

  void validate() const;
};

// One sampled geometric transform. Applied about the image center in the
// order flip, scale, rotate, shift.
struct Transform {
  bool flip = false;
  double scale = 1.0;
  double rotation_deg = 0.0;
  int shift_x = 0;  // pixels
  int shift_y = 0;

  bool is_identity() const noexcept {
    return !flip && scale == 1.0 && rotation_deg == 0.0 && shift_x == 0 && shift_y == 0;
  }
};

Transform sample_transform(const AugmentParams& p, int width, int height, Rng& rng);

// Single resampling pass; out-of-frame pixels become white.
RgbImage warp_bilinear(const RgbImage& image, const Transform& t);
RgbImage warp_nearest(const RgbImage& image, const Transform& t);
ClassMask warp_nearest(const ClassMask& mask, const Transform& t);

// Same transform on both views: bilinear source, nearest tactile.
MapPair apply_transform(const MapPair& pair, const Transform& t);
MapPair geometric_augment(const MapPair& pair, const AugmentParams& p, Rng& rng);

struct RecolorOutcome {
  MapPair pair;
  bool applied = false;
  bool skipped_zoom = false;  // zoom below the building threshold: no-op
};

// With probability grey_recolor_prob, source pixels whose tactile label is
// Streets or Buildings become grey_value. Pairs below zoom 17 are returned
// unchanged with skipped_zoom set (no random draw is consumed).
RecolorOutcome grey_recolor(const MapPair& pair, const AugmentParams& p, Rng& rng,
                            const ClassPalette& palette = ClassPalette::standard());
// The deterministic part of the recolor.
RgbImage recolor_streets_buildings(const RgbImage& source, const ClassMask& tactile_labels,
                                   Rgb grey);

// Rows of [source | tactile | augmented source | augmented tactile] with a
// 4-pixel white gutter.
RgbImage preview_grid(const std::vector<MapPair>& originals, const std::vector<MapPair>& augmented);

}  // namespace tactile::augment
