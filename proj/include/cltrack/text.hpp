#pragma once

#include <charconv>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace cltrack::text
{

inline std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Whitespace-separated fields of a line.
inline std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t\r\n", pos);
    if (start == std::string_view::npos) {
      break;
    }
    auto end = line.find_first_of(" \t\r\n", start);
    if (end == std::string_view::npos) {
      end = line.size();
    }
    fields.push_back(line.substr(start, end - start));
    pos = end;
  }
  return fields;
}

/// Blank lines and `#` comments carry no data.
inline bool is_ignorable(std::string_view line)
{
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

inline std::optional<double> to_double(std::string_view s)
{
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return value;
}

template <typename Int>
std::optional<Int> to_int(std::string_view s)
{
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  Int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return value;
}

/// Fixed 6-decimal rendering; negative zero is printed as zero so output bytes
/// do not depend on the sign of a rounded-away residual.
inline std::string fixed6(double value)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  std::string out(buf);
  if (out == "-0.000000") {
    out.erase(0, 1);
  }
  return out;
}

/// Shortest text that parses back to the same double.
inline std::string shortest(double value)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace cltrack::text
