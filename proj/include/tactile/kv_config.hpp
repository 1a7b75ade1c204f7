#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tactile {

// Ordered `key = value` pairs. Blank lines and lines starting with '#' are
// ignored; surrounding whitespace is trimmed from keys and values.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::filesystem::path& path);
std::string render_key_values(const KeyValues& values);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

int parse_int(std::string_view key, std::string_view value);
double parse_double(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);

}  // namespace tactile
