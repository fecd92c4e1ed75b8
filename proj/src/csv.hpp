#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "colortac/errors.hpp"

namespace colortac::csv {

inline std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty())
    throw ParseError("invalid " + std::string(what) + " '" + std::string(field) + "'", line);
  return value;
}

inline double parse_double(std::string_view f, std::size_t line) { return parse_number<double>(f, line, "number"); }
inline float parse_float(std::string_view f, std::size_t line) { return parse_number<float>(f, line, "number"); }
inline long long parse_int(std::string_view f, std::size_t line) { return parse_number<long long>(f, line, "integer"); }

}  // namespace colortac::csv
