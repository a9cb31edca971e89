#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>

#include "cltrack/errors.hpp"
#include "cltrack/text.hpp"

namespace cltrack
{

/// Flat `key = value` document. `#` starts a comment anywhere on a line.
/// Later assignments to the same key override earlier ones.
class KeyValueFile
{
public:
  struct Entry
  {
    std::string value;
    std::size_t line = 0;
  };

  static KeyValueFile parse(std::istream & in)
  {
    KeyValueFile kv;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line = raw;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = text::trim(line);
      if (line.empty()) {
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError("expected 'key = value'", line_no);
      }
      const auto key = text::trim(line.substr(0, eq));
      if (key.empty()) {
        throw ParseError("empty key", line_no);
      }
      kv.set(std::string(key), std::string(text::trim(line.substr(eq + 1))), line_no);
    }
    return kv;
  }

  /// Parses a single `key=value` override (command-line form).
  void set_assignment(std::string_view assignment)
  {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    }
    set(
      std::string(text::trim(assignment.substr(0, eq))),
      std::string(text::trim(assignment.substr(eq + 1))), 0);
  }

  void set(std::string key, std::string value, std::size_t line)
  {
    entries_[std::move(key)] = Entry{std::move(value), line};
  }

  const std::map<std::string, Entry> & entries() const { return entries_; }

private:
  std::map<std::string, Entry> entries_;
};

}  // namespace cltrack
