#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace situ {

// Base for every error thrown by situ_core.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Forward axis rotated onto the vertical; yaw is undefined.
class DegenerateOrientation : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidScene : public Error {
 public:
  using Error::Error;
};

class InvalidFrame : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Configuration rejected; message names the offending field(s).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace situ
