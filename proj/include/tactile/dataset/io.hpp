#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tactile/image.hpp"
#include "tactile/map_pair.hpp"

namespace tactile::dataset {

// Lossless 8-bit RGB PNG. Alpha and grey inputs are converted on read
// (alpha is composited over white).
RgbImage read_png(const std::filesystem::path& path);
RgbImage decode_png(const std::string& bytes);
void write_png(const std::filesystem::path& path, const RgbImage& image);
std::string encode_png(const RgbImage& image);

// Window of target x target at offset floor((dim - target) / 2) per axis.
RgbImage center_crop(const RgbImage& image, int target);
RgbImage crop(const RgbImage& image, int x0, int y0, int width, int height);

std::string sha256_hex(const std::string& bytes);

// One manifest line per pair. Paths are relative to the manifest's dataset
// root; the hashes cover the PNG file bytes.
struct ManifestRecord {
  std::string id;
  std::string location;
  int zoom = 16;
  std::string country;
  LocationType location_type = LocationType::City;
  Split split = Split::Unassigned;
  std::string source_path;
  std::string tactile_path;
  std::string source_sha256;
  std::string tactile_sha256;
  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

std::string render_manifest_line(const ManifestRecord& r);
ManifestRecord parse_manifest_line(const std::string& line);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
// Hash of the manifest file contents, identifying a dataset.
std::string manifest_hash(const std::filesystem::path& path);

// Writes images/<id>_source.png and images/<id>_tactile.png under `root`
// and returns the record describing them.
ManifestRecord store_pair(const std::filesystem::path& root, const MapPair& pair);
// Loads a pair, verifying both hashes.
MapPair load_pair(const std::filesystem::path& root, const ManifestRecord& record);

// Reads <dir>/source/<name>.png paired with <dir>/tactile/<name>.png, sorted
// by name. Tactile images larger than the source are center-cropped to it and
// their colors are snapped to the nearest palette entry.
std::vector<MapPair> import_directory(const std::filesystem::path& dir, int zoom,
                                      const std::string& country, LocationType type);

// Accepts a dataset directory (uses manifests/pairs.jsonl) or a manifest file.
struct DatasetRef {
  std::filesystem::path root;
  std::filesystem::path manifest;
};
DatasetRef resolve_dataset(const std::filesystem::path& path);
inline constexpr const char* kDefaultManifest = "manifests/pairs.jsonl";

}  // namespace tactile::dataset
