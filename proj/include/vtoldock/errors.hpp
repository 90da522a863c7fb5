#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vtoldock {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration. The message lists every offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite state or gradient encountered during simulation or learning.
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; `position` is the byte offset (or line number for
// text formats) where parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace vtoldock
