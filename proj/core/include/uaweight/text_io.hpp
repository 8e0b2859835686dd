#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uaweight {

/// Shortest-safe decimal form with 9 significant digits (exact round trip for
/// float, the precision used in every report and sidecar this library writes).
std::string format_g9(double value);

/// 17 significant digits; exact round trip for double.
std::string format_g17(double value);

std::string json_quote(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

std::vector<std::string> split(std::string_view line, char delimiter);

}  // namespace uaweight
