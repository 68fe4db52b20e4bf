#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakaudit {

// ASCII-only case mapping; bytes >= 0x80 (UTF-8 continuation/lead bytes)
// pass through unchanged.
std::string ascii_lower(std::string_view s);
std::string ascii_upper(std::string_view s);

inline bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

enum class Casing { lower, title, upper };

// Classifies a surface as lower / Title / UPPER by its ASCII letters.
// Mixed forms such as "hE" return nullopt.
std::optional<Casing> detect_casing(std::string_view s);
std::string apply_casing(std::string_view lower_form, Casing casing);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Fixed-point rendering for report tables.
std::string format_fixed(double value, int decimals);

}  // namespace leakaudit
