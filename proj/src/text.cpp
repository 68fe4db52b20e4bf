#include "leakaudit/text.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "leakaudit/error.hpp"

namespace leakaudit {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string ascii_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

std::optional<Casing> detect_casing(std::string_view s) {
  bool first_letter = true;
  bool first_upper = false;
  bool any_lower_after = false;
  bool any_upper_after = false;
  for (char c : s) {
    const bool upper = c >= 'A' && c <= 'Z';
    const bool lower = c >= 'a' && c <= 'z';
    if (!upper && !lower) continue;
    if (first_letter) {
      first_upper = upper;
      first_letter = false;
    } else {
      any_lower_after |= lower;
      any_upper_after |= upper;
    }
  }
  if (first_letter) return Casing::lower;
  if (!first_upper) {
    if (any_upper_after) return std::nullopt;
    return Casing::lower;
  }
  if (any_lower_after && any_upper_after) return std::nullopt;
  if (any_upper_after) return Casing::upper;
  if (any_lower_after) return Casing::title;
  // Single capital letter; treat as Title so "I"-like forms stay stable.
  return Casing::title;
}

std::string apply_casing(std::string_view lower_form, Casing casing) {
  switch (casing) {
    case Casing::lower:
      return std::string(lower_form);
    case Casing::upper:
      return ascii_upper(lower_form);
    case Casing::title: {
      std::string out(lower_form);
      for (char& c : out) {
        if (c >= 'a' && c <= 'z') {
          c = static_cast<char>(c - 'a' + 'A');
          break;
        }
        if (c >= 'A' && c <= 'Z') break;
      }
      return out;
    }
  }
  return std::string(lower_form);
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace leakaudit
