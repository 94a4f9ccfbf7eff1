#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regraft {

// Shape mismatches, out-of-range settings, unregistered handles.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values, singular systems.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A gradient was requested from something that cannot provide one.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed input text. `line()` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace regraft
