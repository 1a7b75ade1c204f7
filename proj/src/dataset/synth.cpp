#include "tactile/dataset/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tactile/error.hpp"
#include "tactile/random.hpp"

namespace tactile::dataset {

namespace {

using Point = std::array<double, 2>;
constexpr double kPi = std::numbers::pi;

struct ZoomScale {
  double street_width;
  double street_spacing;
  double highway_width;
  double highway_prob;
  double park_prob;
  FractionRange park_size;
  double water_prob;
  FractionRange water_size;
  double hospital_prob;
  FractionRange hospital_size;
  double lot_size;  // building lot edge in pixels
};

ZoomScale scale_for(int zoom) {
  switch (zoom) {
    case 15:
      return {5, 66, 10, 0.65, 0.55, {0.05, 0.24}, 0.35, {0.04, 0.20}, 0.3, {0.05, 0.20}, 0};
    case 16:
      return {7, 70, 13, 0.60, 0.5, {0.06, 0.30}, 0.3, {0.05, 0.23}, 0.35, {0.08, 0.28}, 0};
    case 17:
      return {11, 140, 21, 0.35, 0.5, {0.07, 0.31}, 0.22, {0.05, 0.23}, 0.5, {0.08, 0.28}, 22};
    default:
      return {18, 245, 30, 0.24, 0.5, {0.07, 0.32}, 0.14, {0.05, 0.25}, 0.6, {0.10, 0.32}, 38};
  }
}

constexpr Rgb kStreetOutline{214, 216, 219};
constexpr Rgb kHighwayOutline{230, 168, 62};
constexpr Rgb kBuildingEdge{214, 213, 216};
constexpr Rgb kHalo{255, 255, 255};

// ---------------------------------------------------------------------------
// Rasterization onto a label grid. Pixel (x, y) has its center at
// (x + 0.5, y + 0.5).

class Canvas {
 public:
  explicit Canvas(int size) : size_(size), mask_(size, size) {}

  int size() const noexcept { return size_; }
  ClassMask& mask() noexcept { return mask_; }

  template <typename Inside>
  void paint(double x0, double y0, double x1, double y1, ClassId cls, bool only_background,
             Inside inside) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int ix1 = std::min(size_ - 1, static_cast<int>(std::ceil(x1)));
    const int iy1 = std::min(size_ - 1, static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y <= iy1; ++y) {
      for (int x = ix0; x <= ix1; ++x) {
        if (only_background && mask_.at(x, y) != ClassId::Background) continue;
        if (inside(x + 0.5, y + 0.5)) mask_.set(x, y, cls);
      }
    }
  }

  void polygon(const std::vector<Point>& pts, ClassId cls, bool only_background = false) {
    double x0 = 1e18, y0 = 1e18, x1 = -1e18, y1 = -1e18;
    for (const auto& p : pts) {
      x0 = std::min(x0, p[0]);
      y0 = std::min(y0, p[1]);
      x1 = std::max(x1, p[0]);
      y1 = std::max(y1, p[1]);
    }
    paint(x0, y0, x1, y1, cls, only_background, [&](double px, double py) {
      bool in = false;
      for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
        const auto& a = pts[i];
        const auto& b = pts[j];
        if ((a[1] > py) != (b[1] > py) &&
            px < (b[0] - a[0]) * (py - a[1]) / (b[1] - a[1]) + a[0]) {
          in = !in;
        }
      }
      return in;
    });
  }

  void stroke(const Polyline& line, ClassId cls) {
    const double r = line.width / 2.0;
    for (std::size_t k = 0; k + 1 < line.points.size(); ++k) {
      const Point a = line.points[k];
      const Point b = line.points[k + 1];
      const double dx = b[0] - a[0];
      const double dy = b[1] - a[1];
      const double len2 = dx * dx + dy * dy;
      paint(std::min(a[0], b[0]) - r, std::min(a[1], b[1]) - r, std::max(a[0], b[0]) + r,
            std::max(a[1], b[1]) + r, cls, false, [&](double px, double py) {
              double t = len2 > 0 ? ((px - a[0]) * dx + (py - a[1]) * dy) / len2 : 0.0;
              t = std::clamp(t, 0.0, 1.0);
              const double ex = a[0] + t * dx - px;
              const double ey = a[1] + t * dy - py;
              return ex * ex + ey * ey <= r * r;
            });
    }
  }

 private:
  int size_;
  ClassMask mask_;
};

std::vector<Point> blob(Rng& rng, Point c, double radius) {
  constexpr int kVertices = 40;
  const double a1 = rng.uniform(0.05, 0.2), p1 = rng.uniform(0, 2 * kPi);
  const double a2 = rng.uniform(0.02, 0.12), p2 = rng.uniform(0, 2 * kPi);
  const double a3 = rng.uniform(0.0, 0.06), p3 = rng.uniform(0, 2 * kPi);
  const double stretch = rng.uniform(0.75, 1.3);
  const double rot = rng.uniform(0, kPi);
  std::vector<Point> pts;
  for (int k = 0; k < kVertices; ++k) {
    const double t = 2 * kPi * k / kVertices;
    const double r = radius * (1 + a1 * std::sin(2 * t + p1) + a2 * std::sin(3 * t + p2) +
                               a3 * std::sin(5 * t + p3));
    const double lx = r * std::cos(t) * stretch;
    const double ly = r * std::sin(t) / stretch;
    pts.push_back({c[0] + lx * std::cos(rot) - ly * std::sin(rot),
                   c[1] + lx * std::sin(rot) + ly * std::cos(rot)});
  }
  return pts;
}

std::vector<Point> rotated_rect(Point c, double w, double h, double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  std::vector<Point> pts;
  for (const auto& [sx, sy] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
    const double lx = sx * w / 2, ly = sy * h / 2;
    pts.push_back({c[0] + lx * ca - ly * sa, c[1] + lx * sa + ly * ca});
  }
  return pts;
}

Point random_point(Rng& rng, double size, double margin) {
  return {rng.uniform(-margin, size + margin), rng.uniform(-margin, size + margin)};
}

// A line crossing the whole canvas through `c` in direction `angle`, with a
// gentle sideways wobble.
Polyline crossing_line(Rng& rng, Point c, double angle, double half_length, double width,
                       double wobble) {
  Polyline line;
  line.width = width;
  const double ux = std::cos(angle), uy = std::sin(angle);
  const double amp = rng.uniform(0, wobble);
  const double phase = rng.uniform(0, 2 * kPi);
  constexpr int kSegments = 8;
  for (int k = 0; k <= kSegments; ++k) {
    const double t = -half_length + 2 * half_length * k / kSegments;
    const double off = amp * std::sin(phase + kPi * k / kSegments);
    line.points.push_back({c[0] + t * ux - off * uy, c[1] + t * uy + off * ux});
  }
  return line;
}

void add_water(Rng& rng, Canvas& canvas, const ZoomScale& z) {
  const double size = canvas.size();
  const double area = rng.uniform(z.water_size.lo, z.water_size.hi) * size * size;
  if (rng.bernoulli(0.4)) {
    // River band crossing the map.
    const double width = area / (size * 1.2);
    const Point c = random_point(rng, size, -0.2 * size);
    canvas.stroke(crossing_line(rng, c, rng.uniform(0, kPi), size, width, 0.15 * size),
                  ClassId::Water);
  } else {
    canvas.polygon(blob(rng, random_point(rng, size, -0.1 * size), std::sqrt(area / kPi)),
                   ClassId::Water);
  }
}

void add_buildings(Rng& rng, Canvas& canvas, const ZoomScale& z, double grid_angle) {
  const double size = canvas.size();
  const double lot = z.lot_size * rng.uniform(0.85, 1.15);
  const double ca = std::cos(grid_angle), sa = std::sin(grid_angle);
  const double half = size * 0.75;
  const Point c{size / 2, size / 2};
  for (double v = -half; v < half; v += lot) {
    for (double u = -half; u < half; u += lot) {
      if (!rng.bernoulli(0.72)) continue;
      const double w = lot * rng.uniform(0.55, 0.9);
      const double h = lot * rng.uniform(0.55, 0.9);
      const Point p{c[0] + u * ca - v * sa, c[1] + u * sa + v * ca};
      if (p[0] < -lot || p[1] < -lot || p[0] > size + lot || p[1] > size + lot) continue;
      canvas.polygon(rotated_rect(p, w, h, grid_angle), ClassId::Buildings, true);
    }
  }
}

std::vector<Polyline> add_streets(Rng& rng, Canvas& canvas, const ZoomScale& z,
                                  double grid_angle) {
  const double size = canvas.size();
  const Point c{size / 2, size / 2};
  const double reach = size * std::numbers::sqrt2 / 2 + z.street_spacing;
  std::vector<Polyline> lines;
  for (int family = 0; family < 2; ++family) {
    const double angle = grid_angle + family * (kPi / 2 + rng.uniform(-0.12, 0.12));
    const double nx = -std::sin(angle), ny = std::cos(angle);
    const double spacing = z.street_spacing * rng.uniform(0.85, 1.15);
    for (double off = -reach + rng.uniform(0, spacing); off < reach;
         off += spacing * rng.uniform(0.8, 1.2)) {
      if (rng.bernoulli(0.1)) continue;
      Polyline line = crossing_line(rng, {c[0] + off * nx, c[1] + off * ny}, angle, reach,
                                    z.street_width, 0.6 * z.street_width);
      if (rng.bernoulli(0.2)) {
        // Dead end: keep only one side of the line.
        const std::size_t keep = 2 + static_cast<std::size_t>(rng.integer(0, 4));
        if (rng.bernoulli(0.5)) {
          line.points.resize(keep + 1);
        } else {
          line.points.erase(line.points.begin(), line.points.end() - (keep + 1));
        }
      }
      lines.push_back(std::move(line));
    }
  }
  if (rng.bernoulli(0.3)) {
    lines.push_back(crossing_line(rng, random_point(rng, size, 0), rng.uniform(0, kPi), reach,
                                  z.street_width + 2, 0.1 * size));
  }
  for (const auto& l : lines) canvas.stroke(l, ClassId::Streets);
  return lines;
}

void add_highway(Rng& rng, Canvas& canvas, const ZoomScale& z) {
  const double size = canvas.size();
  Polyline line;
  line.width = z.highway_width;
  const double a = rng.uniform(0, 2 * kPi);
  const double b = a + kPi + rng.uniform(-0.6, 0.6);
  const double r = size * 0.8;
  const Point c{size / 2 + rng.uniform(-0.3, 0.3) * size, size / 2 + rng.uniform(-0.3, 0.3) * size};
  line.points.push_back({c[0] + r * std::cos(a), c[1] + r * std::sin(a)});
  line.points.push_back({c[0] + rng.uniform(-0.1, 0.1) * size, c[1] + rng.uniform(-0.1, 0.1) * size});
  line.points.push_back({c[0] + r * std::cos(b), c[1] + r * std::sin(b)});
  canvas.stroke(line, ClassId::Highways);
}

ClassMask draw_map(Rng& rng, const SynthProfile& p, std::vector<Polyline>& streets) {
  const ZoomScale z = scale_for(p.zoom_analog);
  Canvas canvas(p.size);
  const double size = p.size;
  const double grid_angle = rng.uniform(0, kPi / 2);

  if (rng.bernoulli(z.park_prob)) {
    const double area = rng.uniform(z.park_size.lo, z.park_size.hi) * size * size;
    if (rng.bernoulli(0.5)) {
      canvas.polygon(blob(rng, random_point(rng, size, -0.1 * size), std::sqrt(area / kPi)),
                     ClassId::Parks);
    } else {
      const double aspect = rng.uniform(0.6, 1.6);
      canvas.polygon(rotated_rect(random_point(rng, size, -0.1 * size), std::sqrt(area * aspect),
                                  std::sqrt(area / aspect), grid_angle),
                     ClassId::Parks);
    }
  }
  if (rng.bernoulli(z.water_prob)) add_water(rng, canvas, z);
  if (rng.bernoulli(z.hospital_prob)) {
    const double area = rng.uniform(z.hospital_size.lo, z.hospital_size.hi) * size * size;
    const double aspect = rng.uniform(0.7, 1.4);
    canvas.polygon(rotated_rect(random_point(rng, size, -0.05 * size), std::sqrt(area * aspect),
                                std::sqrt(area / aspect), grid_angle + rng.uniform(-0.1, 0.1)),
                   ClassId::Hospitals);
  }
  if (p.include_buildings) add_buildings(rng, canvas, z, grid_angle);
  streets = add_streets(rng, canvas, z, grid_angle);
  if (rng.bernoulli(z.highway_prob)) add_highway(rng, canvas, z);
  return std::move(canvas.mask());
}

// ---------------------------------------------------------------------------
// Source view.

bool is_road(ClassId c) { return c == ClassId::Streets || c == ClassId::Highways; }

void draw_glyph_text(Rng& rng, RgbImage& img, int x, int y, int chars, int scale, Rgb color) {
  std::vector<std::pair<int, int>> ink;
  for (int ch = 0; ch < chars; ++ch) {
    std::uint32_t bits = 0;
    while (__builtin_popcount(bits) < 6) bits = static_cast<std::uint32_t>(rng.next() & 0x7fff);
    for (int gy = 0; gy < 5; ++gy) {
      for (int gx = 0; gx < 3; ++gx) {
        if (!(bits >> (gy * 3 + gx) & 1)) continue;
        for (int sy = 0; sy < scale; ++sy) {
          for (int sx = 0; sx < scale; ++sx) {
            ink.emplace_back(x + (ch * 4 + gx) * scale + sx, y + gy * scale + sy);
          }
        }
      }
    }
  }
  for (const auto& [px, py] : ink) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (img.contains(px + dx, py + dy)) img.set(px + dx, py + dy, kHalo);
      }
    }
  }
  for (const auto& [px, py] : ink) {
    if (img.contains(px, py)) img.set(px, py, color);
  }
}

void draw_icon(Rng& rng, RgbImage& img, int cx, int cy, bool medical) {
  static constexpr std::array<Rgb, 5> kIconColors = {
      Rgb{234, 67, 53}, Rgb{66, 133, 244}, Rgb{242, 153, 0}, Rgb{52, 168, 83},
      Rgb{137, 99, 214}};
  const Rgb color = medical ? kIconColors[0] : kIconColors[rng.integer(0, 4)];
  const int r = static_cast<int>(rng.integer(4, 6));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy > r * r || !img.contains(cx + dx, cy + dy)) continue;
      const bool cross = (dx == 0 || dy == 0) && std::abs(dx) < r - 1 && std::abs(dy) < r - 1;
      const bool mark = medical ? cross : std::abs(dx) <= 1 && std::abs(dy) <= 1;
      img.set(cx + dx, cy + dy, mark ? Rgb{255, 255, 255} : color);
    }
  }
}

int poisson_like(Rng& rng, double expected) {
  return static_cast<int>(std::floor(expected + rng.uniform()));
}

RgbImage render_source(Rng& rng, const ClassMask& labels, const SynthProfile& p) {
  const auto& style = source_style_colors();
  const int n = labels.width();
  RgbImage img(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const ClassId c = labels.at(x, y);
      Rgb color = style[index_of(c)];
      // Road casings sit on the road's own border pixels, so every source
      // pixel still shows the class it is labelled with.
      bool border = false, edge = false;
      for (const auto& [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int qx = x + dx, qy = y + dy;
        if (qx < 0 || qy < 0 || qx >= n || qy >= n) continue;
        const ClassId q = labels.at(qx, qy);
        border |= !is_road(q);
        edge |= q != c;
      }
      if (c == ClassId::Highways && border) {
        color = kHighwayOutline;
      } else if (c == ClassId::Streets && border) {
        color = kStreetOutline;
      } else if (c == ClassId::Buildings && edge) {
        color = kBuildingEdge;
      }
      img.set(x, y, color);
    }
  }

  const double area_units = static_cast<double>(n) * n / (512.0 * 512.0);
  const int texts = poisson_like(rng, p.text_density * area_units);
  for (int t = 0; t < texts; ++t) {
    const int x = static_cast<int>(rng.integer(-10, n - 1));
    const int y = static_cast<int>(rng.integer(-4, n - 1));
    const int chars = static_cast<int>(rng.integer(3, 10));
    const int scale = rng.bernoulli(0.25) ? 2 : 1;
    const ClassId at = labels.at(std::clamp(x, 0, n - 1), std::clamp(y, 0, n - 1));
    Rgb color{96, 99, 104};
    if (at == ClassId::Parks) color = {38, 122, 60};
    if (at == ClassId::Water) color = {52, 99, 166};
    if (at == ClassId::Hospitals) color = {176, 64, 70};
    draw_glyph_text(rng, img, x, y, chars, scale, color);
  }
  const int icons = poisson_like(rng, p.icon_density * area_units);
  for (int t = 0; t < icons; ++t) {
    const int x = static_cast<int>(rng.integer(0, n - 1));
    const int y = static_cast<int>(rng.integer(0, n - 1));
    draw_icon(rng, img, x, y, labels.at(x, y) == ClassId::Hospitals);
  }
  return img;
}

bool within_ranges(const std::array<double, kClassCount>& f, const SynthProfile& p) {
  for (int c = 0; c < kClassCount; ++c) {
    if (!p.class_fraction[c].contains(f[c])) return false;
  }
  return true;
}

}  // namespace

const std::array<Rgb, kClassCount>& source_style_colors() {
  static const std::array<Rgb, kClassCount> colors = {
      Rgb{255, 255, 255},  // streets: white fill
      Rgb{253, 214, 99},   // highways
      Rgb{195, 236, 178},  // parks
      Rgb{170, 218, 255},  // water
      Rgb{232, 232, 234},  // buildings: light grey
      Rgb{253, 226, 228},  // medical areas: pink
      Rgb{245, 243, 239},  // land
  };
  return colors;
}

void SynthProfile::validate() const {
  if (size < 8 || size > 4096) throw Error(ErrorKind::Config, "synthetic size must be in 8..4096");
  if (zoom_analog < kMinZoom || zoom_analog > kMaxZoom) {
    throw Error(ErrorKind::Config, "zoom analog must be in 15..18");
  }
  if (include_buildings && zoom_analog < kBuildingsMinZoom) {
    throw Error(ErrorKind::Config, "buildings are only drawn from zoom 17");
  }
  for (const auto& r : class_fraction) {
    if (!(r.lo >= 0 && r.hi <= 1 && r.lo <= r.hi)) {
      throw Error(ErrorKind::Config, "class fraction ranges must satisfy 0 <= lo <= hi <= 1");
    }
  }
  if (!include_buildings && class_fraction[index_of(ClassId::Buildings)].lo > 0) {
    throw Error(ErrorKind::Config, "a positive building fraction needs include_buildings");
  }
  if (text_density < 0 || icon_density < 0) {
    throw Error(ErrorKind::Config, "label densities must be non-negative");
  }
  if (max_attempts < 1) throw Error(ErrorKind::Config, "max_attempts must be >= 1");
}

SynthProfile default_synth_profile(int zoom_analog, int size, std::uint64_t seed) {
  SynthProfile p;
  p.size = size;
  p.zoom_analog = zoom_analog;
  p.include_buildings = zoom_analog >= kBuildingsMinZoom;
  p.seed = seed;
  return p;
}

std::array<double, kClassCount> class_fractions(const ClassMask& mask) {
  std::array<double, kClassCount> f{};
  for (int c = 0; c < kClassCount; ++c) {
    f[c] = static_cast<double>(mask.count(static_cast<ClassId>(c))) /
           static_cast<double>(mask.size());
  }
  return f;
}

SynthResult synth_pair(const SynthProfile& profile) {
  profile.validate();
  const ClassPalette palette = ClassPalette::standard();
  for (int attempt = 0; attempt < profile.max_attempts; ++attempt) {
    Rng rng = Rng::derive(profile.seed, static_cast<std::uint64_t>(attempt));
    SynthResult out;
    out.labels = draw_map(rng, profile, out.streets);
    if (!within_ranges(class_fractions(out.labels), profile)) continue;
    out.attempts = attempt + 1;
    out.pair.zoom = profile.zoom_analog;
    out.pair.location = "synthetic seed " + std::to_string(profile.seed);
    out.pair.country = "Synthetic";
    out.pair.location_type = LocationType::City;
    out.pair.tactile = render_mask(out.labels, palette);
    out.pair.source = render_source(rng, out.labels, profile);
    return out;
  }
  throw Error(ErrorKind::Infeasible, "no synthetic map met the class fraction ranges after " +
                                         std::to_string(profile.max_attempts) + " attempts");
}

std::string synth_id(int zoom, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth-z%d-%06d", zoom, index);
  return buf;
}

SynthResult synth_indexed(SynthProfile profile, std::uint64_t seed, int index) {
  profile.seed = Rng::derive(seed, static_cast<std::uint64_t>(index)).next();
  SynthResult r = synth_pair(profile);
  r.pair.id = synth_id(profile.zoom_analog, index);
  return r;
}

}  // namespace tactile::dataset
