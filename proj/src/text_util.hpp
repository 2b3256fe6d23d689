// Internal text/file helpers: shortest-round-trip number formatting, field
// escaping for the tab-separated formats, and whole-file IO.
#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tweetprobe/error.hpp"

namespace tweetprobe::detail {

std::string format_double(double value);
double parse_double(std::string_view text, const std::string& context);
std::uint64_t parse_u64(std::string_view text, const std::string& context);

std::vector<std::string_view> split_view(std::string_view text, char delim);

// Backslash escapes for tab-separated text columns: \t \n \r and backslash.
std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text, const std::string& context);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
bool file_exists(const std::string& path);

}  // namespace tweetprobe::detail
