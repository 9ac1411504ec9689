#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hoki {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or malformed argument (bad flag value, bad spec, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A data or model file could not be read or failed validation.
/// line == 0 means the problem is not tied to a specific line.
class ParseError : public Error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : Error(line > 0 ? path + ":" + std::to_string(line) + ": " + what
                       : path + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

/// Model file carries a format_version this build does not understand.
class VersionError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite or otherwise unusable result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hoki
