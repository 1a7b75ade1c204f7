#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tactile::dataset {

// One entry of a static-map style request. `specification` is either
// "color:0xRRGGBB" (lower-case hex) or "visibility:off".
struct StyleRule {
  std::string feature;
  std::string element;
  std::string specification;
  friend bool operator==(const StyleRule&, const StyleRule&) = default;
};

// The rules that turn a standard road map into a tactile class image.
const std::vector<StyleRule>& default_style_rules();

// Throws Config when the specification grammar or a name is malformed.
void validate_style_rule(const StyleRule& rule);

// "feature:<f>|element:<e>|<spec>" per rule, in input order.
std::vector<std::string> compile_style(const std::vector<StyleRule>& rules);

// Inverse of one compiled line.
StyleRule parse_style_rule(std::string_view line);

enum class QueryTemplate { City, UkCity, Landmark, University, Hospital };

// Location query strings for the map API:
//   City        "<City>, <Province/State>, <Country>"
//   UkCity      "<City>, <Country>, UK"
//   Landmark    "<Name>, <City/State>, <Country>"
//   University  "<Institution>, <Country>"
//   Hospital    "<Name>, <Address>, <City>, <State>, USA"
// Every part is mandatory and must be non-blank.
std::string build_query(QueryTemplate kind, const std::vector<std::string>& parts);
int query_part_count(QueryTemplate kind) noexcept;

}  // namespace tactile::dataset
