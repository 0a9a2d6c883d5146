#pragma once

#include <stdexcept>
#include <string>

namespace ttita {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform to an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV input; carries the 1-based physical line of the fault.
class CsvError : public Error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// Schema invalid, or data does not match a schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint file is corrupt or of an unknown format.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ttita
