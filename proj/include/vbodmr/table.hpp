#pragma once

#include "vbodmr/inversion.hpp"
#include "vbodmr/signal_synthesis.hpp"
#include "vbodmr/units.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vbodmr {

// One expected column. A file with a header line may use any of the
// accepted header names; each carries the power of ten that converts the
// column to canonical units. Headerless files are read positionally and use
// `positional_exponent`.
struct ColumnSpec {
  std::string role;
  std::vector<std::pair<std::string, int>> headers;
  int positional_exponent = 0;
};

struct TableSchema {
  std::vector<ColumnSpec> columns;
};

// Rows in canonical units, one value per schema column, in schema order.
struct Table {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;  // source line of each row (1-based)
  std::string source;              // file name used in error messages
};

// Comma- or tab-separated text; blank lines and lines starting with '#' are
// skipped; the first remaining line is a header if any cell is non-numeric.
// Throws TableError naming the offending row and line.
Table parse_table(std::string_view text, const TableSchema& schema, const std::string& source = {});
Table load_table(const std::filesystem::path& path, const TableSchema& schema);

TableSchema spectrum_schema(units::FrequencyUnit positional = units::FrequencyUnit::mhz);
TableSchema resonance_schema(units::FieldUnit field = units::FieldUnit::gauss,
                             units::FrequencyUnit freq = units::FrequencyUnit::mhz);
TableSchema rabi_schema();
TableSchema angle_trace_schema();

// Typed loaders; domain violations are reported with their row number.
Trace load_spectrum(const std::filesystem::path& path,
                    units::FrequencyUnit positional = units::FrequencyUnit::mhz);
std::vector<ResonanceRow> load_resonance_rows(const std::filesystem::path& path,
                                              units::FieldUnit field = units::FieldUnit::gauss,
                                              units::FrequencyUnit freq = units::FrequencyUnit::mhz);
Trace load_rabi_trace(const std::filesystem::path& path);
// Consecutive rows sharing theta form one trace; order is preserved.
std::vector<AngleTrace> load_angle_traces(const std::filesystem::path& path);

std::vector<ResonanceRow> resonance_rows_from(const Table& table);
std::vector<AngleTrace> angle_traces_from(const Table& table);

// Header line plus one line per row, values printed with 12 significant
// digits so the output is byte-stable.
std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<double>>& rows, char separator = ',');

std::string format_number(double value);

}  // namespace vbodmr
