#include "vbodmr/error.hpp"

#include <string>

namespace vbodmr {

ConfigError::ConfigError(const std::string& message, std::size_t line, std::size_t column)
    : Error(line == 0 ? message
                      : "line " + std::to_string(line) +
                            (column == 0 ? std::string() : ", column " + std::to_string(column)) +
                            ": " + message),
      line_(line),
      column_(column) {}

TableError::TableError(const std::string& message, std::size_t row, std::size_t line,
                       const std::string& source)
    : Error((source.empty() ? std::string() : source + ": ") +
            (row == 0 ? message
                      : "row " + std::to_string(row) + " (line " + std::to_string(line) + "): " +
                            message)),
      row_(row),
      line_(line) {}

}  // namespace vbodmr
