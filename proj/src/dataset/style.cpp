#include "tactile/dataset/style.hpp"

#include <cctype>

#include "tactile/error.hpp"
#include "tactile/kv_config.hpp"

namespace tactile::dataset {

const std::vector<StyleRule>& default_style_rules() {
  static const std::vector<StyleRule> rules = {
      {"all", "all", "color:0xffffff"},
      {"administrative", "labels", "visibility:off"},
      {"landscape", "all", "color:0x000000"},
      {"landscape", "labels", "visibility:off"},
      {"landscape.man_made", "all", "color:0x00ffff"},
      {"landscape.man_made", "geometry.fill", "color:0xffffff"},
      {"landscape.man_made.building", "geometry.fill", "color:0x00ffff"},
      {"landscape.natural", "all", "color:0xffffff"},
      {"poi", "labels", "visibility:off"},
      {"poi", "geometry.fill", "color:0x00ff00"},
      {"poi.medical", "geometry.fill", "color:0x808080"},
      {"poi.place_of_worship", "geometry.fill", "visibility:off"},
      {"poi.school", "geometry.fill", "visibility:off"},
      {"road", "labels", "visibility:off"},
      {"road.highway", "all", "color:0xffff00"},
      {"road.highway", "geometry.fill", "color:0xffff00"},
      {"road.highway.controlled_access", "geometry.fill", "color:0xffff00"},
      {"road.arterial", "all", "color:0xff00ff"},
      {"road.arterial", "geometry.fill", "color:0xff00ff"},
      {"road.local", "all", "color:0xff00ff"},
      {"road.local", "geometry.fill", "color:0xff00ff"},
      {"transit", "all", "visibility:off"},
      {"transit", "labels", "visibility:off"},
      {"water", "all", "color:0x0000ff"},
      {"water", "geometry.fill", "color:0x0000ff"},
      {"water", "labels", "visibility:off"},
  };
  return rules;
}

namespace {

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::islower(static_cast<unsigned char>(c)) || c == '.' || c == '_')) return false;
  }
  return s.front() != '.' && s.back() != '.';
}

bool valid_spec(const std::string& s) {
  if (s == "visibility:off") return true;
  constexpr std::string_view prefix = "color:0x";
  if (s.size() != prefix.size() + 6 || s.compare(0, prefix.size(), prefix) != 0) return false;
  for (std::size_t i = prefix.size(); i < s.size(); ++i) {
    const char c = s[i];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

void validate_style_rule(const StyleRule& rule) {
  if (!valid_name(rule.feature)) {
    throw Error(ErrorKind::Config, "style feature '" + rule.feature + "' is malformed");
  }
  if (!valid_name(rule.element)) {
    throw Error(ErrorKind::Config, "style element '" + rule.element + "' is malformed");
  }
  if (!valid_spec(rule.specification)) {
    throw Error(ErrorKind::Config, "style specification '" + rule.specification +
                                       "' is neither color:0xrrggbb nor visibility:off");
  }
}

std::vector<std::string> compile_style(const std::vector<StyleRule>& rules) {
  std::vector<std::string> out;
  out.reserve(rules.size());
  for (const auto& r : rules) {
    validate_style_rule(r);
    out.push_back("feature:" + r.feature + "|element:" + r.element + "|" + r.specification);
  }
  return out;
}

StyleRule parse_style_rule(std::string_view line) {
  const std::string text = trim(std::string(line));
  const auto p1 = text.find('|');
  const auto p2 = p1 == std::string::npos ? p1 : text.find('|', p1 + 1);
  if (p2 == std::string::npos || text.compare(0, 8, "feature:") != 0 ||
      text.compare(p1 + 1, 8, "element:") != 0) {
    throw Error(ErrorKind::Config, "style line '" + text + "' is not feature:..|element:..|..");
  }
  StyleRule r{text.substr(8, p1 - 8), text.substr(p1 + 9, p2 - p1 - 9), text.substr(p2 + 1)};
  validate_style_rule(r);
  return r;
}

int query_part_count(QueryTemplate kind) noexcept {
  switch (kind) {
    case QueryTemplate::City: return 3;
    case QueryTemplate::UkCity: return 2;
    case QueryTemplate::Landmark: return 3;
    case QueryTemplate::University: return 2;
    case QueryTemplate::Hospital: return 4;
  }
  return 0;
}

std::string build_query(QueryTemplate kind, const std::vector<std::string>& parts) {
  const int expected = query_part_count(kind);
  if (static_cast<int>(parts.size()) != expected) {
    throw Error(ErrorKind::Config, "query needs " + std::to_string(expected) + " parts, got " +
                                       std::to_string(parts.size()));
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string p = trim(parts[i]);
    if (p.empty()) {
      throw Error(ErrorKind::Config, "query part " + std::to_string(i + 1) + " is empty");
    }
    if (i) out += ", ";
    out += p;
  }
  if (kind == QueryTemplate::UkCity) out += ", UK";
  if (kind == QueryTemplate::Hospital) out += ", USA";
  return out;
}

}  // namespace tactile::dataset
