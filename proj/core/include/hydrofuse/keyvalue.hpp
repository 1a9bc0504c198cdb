#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hydrofuse {

/// Ordered `key = value` entries. Blank lines and lines starting with '#' are skipped.
using KeyValueList = std::vector<std::pair<std::string, std::string>>;

KeyValueList parse_key_values(std::string_view text, const std::string& origin);
KeyValueList read_key_value_file(const std::filesystem::path& path);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

double parse_double(std::string_view s, const std::string& what);
long long parse_int(std::string_view s, const std::string& what);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
std::string format_float(float v);

}  // namespace hydrofuse
