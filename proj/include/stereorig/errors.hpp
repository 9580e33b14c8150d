#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stereorig {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the operation's mathematical domain.
struct DomainError : Error {
  using Error::Error;
};

// Zero or negative disparity: the point sits at infinity.
struct AtInfinityError : Error {
  using Error::Error;
};

// Rangefinder produced no return, so there is nothing to compensate against.
struct NoReferenceError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct CalibrationError : Error {
  using Error::Error;
};

struct StateError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::size_t line, const std::string &what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

struct ConfigError : Error {
  using Error::Error;
};

// Something the library guarantees did not hold. Maps to exit status 3.
struct InvariantError : Error {
  using Error::Error;
};

} // namespace stereorig
