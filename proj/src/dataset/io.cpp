#include "tactile/dataset/io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <csetjmp>
#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tactile/error.hpp"
#include "tactile/kv_config.hpp"
#include "tactile/palette.hpp"

namespace tactile::dataset {

namespace {

struct ReadState {
  const std::string* bytes;
  std::size_t pos;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<ReadState*>(png_get_io_ptr(png));
  if (st->bytes->size() - st->pos < n) png_error(png, "truncated PNG data");
  std::memcpy(out, st->bytes->data() + st->pos, n);
  st->pos += n;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), n);
}

void png_flush_cb(png_structp) {}

// libpng reports errors by longjmp; the message is kept here and turned into
// an exception once control is back in C++.
struct PngErrors {
  std::string message;
};

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* errors = static_cast<PngErrors*>(png_get_error_ptr(png));
  errors->message = msg;
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

}  // namespace

RgbImage decode_png(const std::string& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
    throw Error(ErrorKind::Format, "not a PNG image");
  }
  PngErrors errors;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &errors, png_error_cb, png_warning_cb);
  if (!png) throw Error(ErrorKind::Format, "PNG: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  ReadState st{&bytes, 0};
  std::vector<std::uint8_t> data;
  std::vector<png_bytep> rows;
  int w = 0;
  int h = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Format, "PNG: " + errors.message);
  }
  png_set_read_fn(png, &st, png_read_cb);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_color_16 white{0, 255, 255, 255, 255};
  png_set_background(png, &white, PNG_BACKGROUND_GAMMA_SCREEN, 0, 1.0);
  png_read_update_info(png, info);
  w = static_cast<int>(png_get_image_width(png, info));
  h = static_cast<int>(png_get_image_height(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Format, "PNG did not convert to 8-bit RGB");
  }
  data.resize(rowbytes * static_cast<std::size_t>(h));
  rows.resize(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = data.data() + rowbytes * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return RgbImage(w, h, std::move(data));
}

std::string encode_png(const RgbImage& image) {
  PngErrors errors;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &errors, png_error_cb, png_warning_cb);
  if (!png) throw Error(ErrorKind::Format, "PNG: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  std::string out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Format, "PNG: " + errors.message);
  }
  png_set_write_fn(png, &out, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto bytes = image.bytes();
  const std::size_t stride = static_cast<std::size_t>(image.width()) * 3;
  for (int y = 0; y < image.height(); ++y) {
    png_write_row(png, bytes.data() + stride * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

RgbImage read_png(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open image " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return decode_png(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_text_file(path, encode_png(image));
}

RgbImage crop(const RgbImage& image, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width <= 0 || height <= 0 || x0 + width > image.width() ||
      y0 + height > image.height()) {
    throw Error(ErrorKind::ImageSize, "crop window exceeds the " + std::to_string(image.width()) +
                                          "x" + std::to_string(image.height()) + " image");
  }
  RgbImage out(width, height);
  const auto src = image.bytes();
  auto dst = out.bytes();
  const std::size_t row = static_cast<std::size_t>(width) * 3;
  for (int y = 0; y < height; ++y) {
    const std::size_t from =
        (static_cast<std::size_t>(y0 + y) * static_cast<std::size_t>(image.width()) +
         static_cast<std::size_t>(x0)) * 3;
    std::memcpy(dst.data() + row * static_cast<std::size_t>(y), src.data() + from, row);
  }
  return out;
}

RgbImage center_crop(const RgbImage& image, int target) {
  if (target <= 0 || target > image.width() || target > image.height()) {
    throw Error(ErrorKind::ImageSize, "cannot center-crop " + std::to_string(image.width()) + "x" +
                                          std::to_string(image.height()) + " to " +
                                          std::to_string(target));
  }
  return crop(image, (image.width() - target) / 2, (image.height() - target) / 2, target, target);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw Error(ErrorKind::Io, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string render_manifest_line(const ManifestRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["location"] = r.location;
  j["zoom"] = r.zoom;
  j["country"] = r.country;
  j["location_type"] = std::string(to_string(r.location_type));
  j["split"] = std::string(to_string(r.split));
  j["source"] = r.source_path;
  j["tactile"] = r.tactile_path;
  j["source_sha256"] = r.source_sha256;
  j["tactile_sha256"] = r.tactile_sha256;
  return j.dump();
}

ManifestRecord parse_manifest_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ManifestRecord r;
    r.id = j.at("id").get<std::string>();
    r.location = j.at("location").get<std::string>();
    r.zoom = j.at("zoom").get<int>();
    r.country = j.at("country").get<std::string>();
    r.location_type = parse_location_type(j.at("location_type").get<std::string>());
    r.split = parse_split(j.at("split").get<std::string>());
    r.source_path = j.at("source").get<std::string>();
    r.tactile_path = j.at("tactile").get<std::string>();
    r.source_sha256 = j.at("source_sha256").get<std::string>();
    r.tactile_sha256 = j.at("tactile_sha256").get<std::string>();
    if (r.zoom < kMinZoom || r.zoom > kMaxZoom) {
      throw Error(ErrorKind::Format, "manifest zoom " + std::to_string(r.zoom) + " out of range");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("manifest record: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records) {
  std::string text;
  for (const auto& r : records) text += render_manifest_line(r) + "\n";
  write_text_file(path, text);
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::vector<ManifestRecord> out;
  std::istringstream in(read_text_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_manifest_line(line));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string manifest_hash(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

ManifestRecord store_pair(const std::filesystem::path& root, const MapPair& pair) {
  if (pair.source.width() != pair.tactile.width() ||
      pair.source.height() != pair.tactile.height()) {
    throw Error(ErrorKind::ImageSize, "pair " + pair.id + " has mismatched image sizes");
  }
  ManifestRecord r;
  r.id = pair.id;
  r.location = pair.location;
  r.zoom = pair.zoom;
  r.country = pair.country;
  r.location_type = pair.location_type;
  r.split = pair.split;
  r.source_path = "images/" + pair.id + "_source.png";
  r.tactile_path = "images/" + pair.id + "_tactile.png";
  const std::string src = encode_png(pair.source);
  const std::string tac = encode_png(pair.tactile);
  write_text_file(root / r.source_path, src);
  write_text_file(root / r.tactile_path, tac);
  r.source_sha256 = sha256_hex(src);
  r.tactile_sha256 = sha256_hex(tac);
  return r;
}

MapPair load_pair(const std::filesystem::path& root, const ManifestRecord& record) {
  MapPair p;
  p.id = record.id;
  p.location = record.location;
  p.zoom = record.zoom;
  p.country = record.country;
  p.location_type = record.location_type;
  p.split = record.split;
  const std::string src = read_text_file(root / record.source_path);
  const std::string tac = read_text_file(root / record.tactile_path);
  if (sha256_hex(src) != record.source_sha256 || sha256_hex(tac) != record.tactile_sha256) {
    throw Error(ErrorKind::Format, "pair " + record.id + ": image hash does not match manifest");
  }
  p.source = decode_png(src);
  p.tactile = decode_png(tac);
  if (p.source.width() != p.tactile.width() || p.source.height() != p.tactile.height()) {
    throw Error(ErrorKind::ImageSize, "pair " + record.id + " has mismatched image sizes");
  }
  return p;
}

std::vector<MapPair> import_directory(const std::filesystem::path& dir, int zoom,
                                      const std::string& country, LocationType type) {
  namespace fs = std::filesystem;
  if (zoom < kMinZoom || zoom > kMaxZoom) {
    throw Error(ErrorKind::Config, "import zoom must be in 15..18");
  }
  const fs::path src_dir = dir / "source";
  const fs::path tac_dir = dir / "tactile";
  if (!fs::is_directory(src_dir) || !fs::is_directory(tac_dir)) {
    throw Error(ErrorKind::Io, dir.string() + " needs source/ and tactile/ subdirectories");
  }
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(src_dir)) {
    if (e.path().extension() == ".png") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  const ClassPalette palette = ClassPalette::standard();
  std::vector<MapPair> out;
  for (const auto& name : names) {
    const fs::path tac = tac_dir / (name + ".png");
    if (!fs::exists(tac)) throw Error(ErrorKind::Io, "no tactile image for " + name);
    MapPair p;
    p.id = name;
    p.location = name;
    p.zoom = zoom;
    p.country = country;
    p.location_type = type;
    p.source = read_png(src_dir / (name + ".png"));
    RgbImage t = read_png(tac);
    if (p.source.width() != p.source.height()) {
      throw Error(ErrorKind::ImageSize, "source image " + name + " is not square");
    }
    if (t.width() != p.source.width() || t.height() != p.source.height()) {
      t = center_crop(t, p.source.width());
    }
    p.tactile = render_mask(segment_image(t, palette), palette);
    out.push_back(std::move(p));
  }
  return out;
}

DatasetRef resolve_dataset(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    const auto m = path / kDefaultManifest;
    if (!std::filesystem::exists(m)) {
      throw Error(ErrorKind::Io, "dataset directory " + path.string() + " has no " +
                                     kDefaultManifest);
    }
    return {path, m};
  }
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, "no such dataset " + path.string());
  auto root = path.parent_path();
  if (root.filename() == "manifests") root = root.parent_path();
  return {root, path};
}

}  // namespace tactile::dataset
