#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atebench {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
inline bool starts_with(std::string_view s, std::string_view prefix) { return s.starts_with(prefix); }

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest text that parses back to the same double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
// Write to a sibling temporary, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

}  // namespace atebench
