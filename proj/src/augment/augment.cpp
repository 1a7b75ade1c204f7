#include "tactile/augment/augment.hpp"

#include <cmath>
#include <numbers>

#include "tactile/error.hpp"

namespace tactile::augment {

void AugmentParams::validate() const {
  auto prob = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::Config, std::string(what) + " must be in [0,1]");
  };
  prob(hflip_prob, "hflip_prob");
  prob(grey_recolor_prob, "grey_recolor_prob");
  if (!(max_shift >= 0.0 && max_shift < 1.0)) {
    throw Error(ErrorKind::Config, "max_shift must be in [0,1)");
  }
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi)) {
    throw Error(ErrorKind::Config, "scale range must satisfy 0 < lo <= hi");
  }
  if (!(max_rotation_deg >= 0.0 && max_rotation_deg <= 180.0)) {
    throw Error(ErrorKind::Config, "max_rotation_deg must be in [0,180]");
  }
}

Transform sample_transform(const AugmentParams& p, int width, int height, Rng& rng) {
  p.validate();
  Transform t;
  t.flip = p.hflip_prob > 0 && rng.bernoulli(p.hflip_prob);
  t.scale = p.scale_lo == p.scale_hi ? p.scale_lo : rng.uniform(p.scale_lo, p.scale_hi);
  t.rotation_deg = p.max_rotation_deg > 0 ? rng.uniform(-p.max_rotation_deg, p.max_rotation_deg) : 0.0;
  if (p.max_shift > 0) {
    t.shift_x = static_cast<int>(std::lround(rng.uniform(-p.max_shift, p.max_shift) * width));
    t.shift_y = static_cast<int>(std::lround(rng.uniform(-p.max_shift, p.max_shift) * height));
  }
  return t;
}

namespace {

constexpr Rgb kWhite{255, 255, 255};

// Maps output pixel centers back to input coordinates.
struct InverseMap {
  double cx, cy, c, s, inv_scale;
  bool flip;
  int width;
  int tx, ty;

  InverseMap(const Transform& t, int w, int h)
      : cx(w / 2.0), cy(h / 2.0), flip(t.flip), width(w), tx(t.shift_x), ty(t.shift_y) {
    const double a = t.rotation_deg * std::numbers::pi / 180.0;
    c = std::cos(a);
    s = std::sin(a);
    inv_scale = 1.0 / t.scale;
    if (t.rotation_deg == 0.0) {
      c = 1.0;
      s = 0.0;
    }
  }

  // Continuous input position of output pixel (x, y)'s center.
  void operator()(int x, int y, double& px, double& py) const {
    const double qx = (x + 0.5) - tx - cx;
    const double qy = (y + 0.5) - ty - cy;
    // undo rotation, then scale
    double ux = (c * qx + s * qy) * inv_scale;
    const double uy = (-s * qx + c * qy) * inv_scale;
    if (flip) ux = -ux;
    px = ux + cx;
    py = uy + cy;
  }
};

}  // namespace

RgbImage warp_nearest(const RgbImage& image, const Transform& t) {
  if (t.is_identity()) return image;
  RgbImage out(image.width(), image.height());
  const InverseMap inv(t, image.width(), image.height());
  const int w = image.width(), h = image.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double px, py;
      inv(x, y, px, py);
      const int sx = static_cast<int>(std::floor(px));
      const int sy = static_cast<int>(std::floor(py));
      out.set(x, y, image.contains(sx, sy) ? image.at(sx, sy) : kWhite);
    }
  }
  return out;
}

ClassMask warp_nearest(const ClassMask& mask, const Transform& t) {
  if (t.is_identity()) return mask;
  ClassMask out(mask.width(), mask.height());
  const InverseMap inv(t, mask.width(), mask.height());
  const int w = mask.width(), h = mask.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double px, py;
      inv(x, y, px, py);
      const int sx = static_cast<int>(std::floor(px));
      const int sy = static_cast<int>(std::floor(py));
      const bool in = sx >= 0 && sy >= 0 && sx < w && sy < h;
      out.set(x, y, in ? mask.at(sx, sy) : ClassId::Background);
    }
  }
  return out;
}

RgbImage warp_bilinear(const RgbImage& image, const Transform& t) {
  if (t.is_identity()) return image;
  const int w = image.width(), h = image.height();
  RgbImage out(w, h);
  const InverseMap inv(t, w, h);
  auto sample = [&](int x, int y, int ch) -> double {
    return image.contains(x, y) ? image.at(x, y)[ch] : 255.0;
  };
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double px, py;
      inv(x, y, px, py);
      // Sample grid is at pixel centers.
      const double fx = px - 0.5, fy = py - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const int y0 = static_cast<int>(std::floor(fy));
      const double ax = fx - x0, ay = fy - y0;
      if (x0 < -1 || y0 < -1 || x0 >= w || y0 >= h) {
        out.set(x, y, kWhite);
        continue;
      }
      Rgb c{};
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1 - ax) * sample(x0, y0, ch) + ax * sample(x0 + 1, y0, ch);
        const double bot = (1 - ax) * sample(x0, y0 + 1, ch) + ax * sample(x0 + 1, y0 + 1, ch);
        const double v = (1 - ay) * top + ay * bot;
        c[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
      out.set(x, y, c);
    }
  }
  return out;
}

MapPair apply_transform(const MapPair& pair, const Transform& t) {
  if (pair.source.width() != pair.tactile.width() ||
      pair.source.height() != pair.tactile.height()) {
    throw Error(ErrorKind::ImageSize, "pair " + pair.id + " views differ in size");
  }
  MapPair out = pair;
  out.source = warp_bilinear(pair.source, t);
  out.tactile = warp_nearest(pair.tactile, t);
  return out;
}

MapPair geometric_augment(const MapPair& pair, const AugmentParams& p, Rng& rng) {
  return apply_transform(pair, sample_transform(p, pair.source.width(), pair.source.height(), rng));
}

RgbImage recolor_streets_buildings(const RgbImage& source, const ClassMask& labels, Rgb grey) {
  if (source.width() != labels.width() || source.height() != labels.height()) {
    throw Error(ErrorKind::ImageSize, "recolor: mask and source differ in size");
  }
  RgbImage out = source;
  for (int y = 0; y < source.height(); ++y) {
    for (int x = 0; x < source.width(); ++x) {
      const ClassId c = labels.at(x, y);
      if (c == ClassId::Streets || c == ClassId::Buildings) out.set(x, y, grey);
    }
  }
  return out;
}

RecolorOutcome grey_recolor(const MapPair& pair, const AugmentParams& p, Rng& rng,
                            const ClassPalette& palette) {
  p.validate();
  RecolorOutcome r;
  if (pair.zoom < kBuildingsMinZoom) {
    r.pair = pair;
    r.skipped_zoom = true;
    return r;
  }
  r.applied = rng.bernoulli(p.grey_recolor_prob);
  r.pair = pair;
  if (r.applied) {
    r.pair.source = recolor_streets_buildings(pair.source, segment_image(pair.tactile, palette),
                                              p.grey_value);
  }
  return r;
}

RgbImage preview_grid(const std::vector<MapPair>& originals, const std::vector<MapPair>& augmented) {
  if (originals.size() != augmented.size() || originals.empty()) {
    throw Error(ErrorKind::Config, "preview needs matching, non-empty pair lists");
  }
  constexpr int kGutter = 4;
  const int w = originals[0].source.width();
  const int h = originals[0].source.height();
  const int rows = static_cast<int>(originals.size());
  RgbImage grid(4 * w + 5 * kGutter, rows * h + (rows + 1) * kGutter);
  for (int r = 0; r < rows; ++r) {
    const RgbImage* tiles[4] = {&originals[r].source, &originals[r].tactile, &augmented[r].source,
                                &augmented[r].tactile};
    for (int k = 0; k < 4; ++k) {
      if (tiles[k]->width() != w || tiles[k]->height() != h) {
        throw Error(ErrorKind::ImageSize, "preview tiles must share one size");
      }
      const int ox = kGutter + k * (w + kGutter);
      const int oy = kGutter + r * (h + kGutter);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) grid.set(ox + x, oy + y, tiles[k]->at(x, y));
      }
    }
  }
  return grid;
}

}  // namespace tactile::augment
