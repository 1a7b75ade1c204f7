#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tactile/image.hpp"

namespace tactile {

enum class LocationType { City, Landmark, Hospital, University };
enum class Split { Unassigned, Train, TestEnglish, TestWorld };

std::string_view to_string(LocationType t) noexcept;
std::string_view to_string(Split s) noexcept;
LocationType parse_location_type(std::string_view s);
Split parse_split(std::string_view s);

inline constexpr int kMinZoom = 15;
inline constexpr int kMaxZoom = 18;
// Zoom levels from which buildings are rendered.
inline constexpr int kBuildingsMinZoom = 17;

// Registered (source, tactile) pair. Both images share dimensions; the
// tactile image is exact palette colors.
struct MapPair {
  std::string id;
  std::string location;
  int zoom = 16;
  std::string country;
  LocationType location_type = LocationType::City;
  Split split = Split::Unassigned;
  RgbImage source;
  RgbImage tactile;
};

// The three trained model families and the test zooms each may be evaluated
// on: single-zoom models on zooms with the same building visibility, the
// double-zoom model on every collected zoom.
enum class ModelId { Zoom16, Zoom18, Zoom16_18 };

std::string_view to_string(ModelId m) noexcept;
ModelId parse_model_id(std::string_view s);
bool zoom_compatible(ModelId model, int zoom) noexcept;
// Training zooms of the model, e.g. {16, 18} for the double-zoom model.
std::vector<int> training_zooms(ModelId model);

}  // namespace tactile
