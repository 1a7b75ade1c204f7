#include "tactile/map_pair.hpp"

#include "tactile/error.hpp"
#include "tactile/kv_config.hpp"

namespace tactile {

std::string_view to_string(LocationType t) noexcept {
  switch (t) {
    case LocationType::City: return "city";
    case LocationType::Landmark: return "landmark";
    case LocationType::Hospital: return "hospital";
    case LocationType::University: return "university";
  }
  return "city";
}

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::Unassigned: return "unassigned";
    case Split::Train: return "train";
    case Split::TestEnglish: return "test-english";
    case Split::TestWorld: return "test-world";
  }
  return "unassigned";
}

LocationType parse_location_type(std::string_view s) {
  const std::string v = to_lower(s);
  if (v == "city") return LocationType::City;
  if (v == "landmark") return LocationType::Landmark;
  if (v == "hospital") return LocationType::Hospital;
  if (v == "university" || v == "college") return LocationType::University;
  throw Error(ErrorKind::Format, "unknown location type `" + std::string(s) + "`");
}

Split parse_split(std::string_view s) {
  const std::string v = to_lower(s);
  if (v == "unassigned") return Split::Unassigned;
  if (v == "train") return Split::Train;
  if (v == "test-english") return Split::TestEnglish;
  if (v == "test-world") return Split::TestWorld;
  throw Error(ErrorKind::Format, "unknown split `" + std::string(s) + "`");
}

std::string_view to_string(ModelId m) noexcept {
  switch (m) {
    case ModelId::Zoom16: return "Zoom-16";
    case ModelId::Zoom18: return "Zoom-18";
    case ModelId::Zoom16_18: return "Zoom-16/18";
  }
  return "Zoom-16";
}

ModelId parse_model_id(std::string_view s) {
  const std::string v = to_lower(s);
  if (v == "zoom-16" || v == "zoom16" || v == "16") return ModelId::Zoom16;
  if (v == "zoom-18" || v == "zoom18" || v == "18") return ModelId::Zoom18;
  if (v == "zoom-16/18" || v == "zoom16_18" || v == "zoom-16-18" || v == "16/18" ||
      v == "16,18" || v == "double") {
    return ModelId::Zoom16_18;
  }
  throw Error(ErrorKind::Config, "unknown model id `" + std::string(s) +
                                     "` (expected Zoom-16, Zoom-18 or Zoom-16/18)");
}

bool zoom_compatible(ModelId model, int zoom) noexcept {
  switch (model) {
    case ModelId::Zoom16: return zoom == 15 || zoom == 16;
    case ModelId::Zoom18: return zoom == 17 || zoom == 18;
    case ModelId::Zoom16_18: return zoom >= kMinZoom && zoom <= kMaxZoom;
  }
  return false;
}

std::vector<int> training_zooms(ModelId model) {
  switch (model) {
    case ModelId::Zoom16: return {16};
    case ModelId::Zoom18: return {18};
    case ModelId::Zoom16_18: return {16, 18};
  }
  return {};
}

}  // namespace tactile
