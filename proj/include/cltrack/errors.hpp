#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cltrack
{

/// Malformed text input. `line()` is 1-based; 0 when no line applies.
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string & message, std::size_t line)
  : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
    line_(line)
  {
  }

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input whose content is unusable (bad calibration, mismatched sequences).
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid tracker or simulator configuration.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition (dimension mismatch, stale indices).
class ContractViolation : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

}  // namespace cltrack
