#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vbodmr {

// Base for every error this library raises.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented domain invariant (negative field, E < 0, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// A numerical routine could not produce a meaningful answer for its input.
class ComputationError : public Error {
public:
  using Error::Error;
};

// Malformed configuration document; line and column are 1-based, 0 when unknown.
class ConfigError : public Error {
public:
  ConfigError(const std::string& message, std::size_t line, std::size_t column = 0);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

// Malformed input table. `row` counts data rows from 1; `line` is the file line.
class TableError : public Error {
public:
  TableError(const std::string& message, std::size_t row = 0, std::size_t line = 0,
             const std::string& source = {});
  std::size_t row() const noexcept { return row_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t row_;
  std::size_t line_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace vbodmr
