#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace legendre {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A precondition on shapes, indices or parameters was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Overflow, divergence, singular systems, failed line search.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace legendre
