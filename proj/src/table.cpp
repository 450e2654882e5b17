#include "vbodmr/table.hpp"

#include "vbodmr/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace vbodmr {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  const char sep = line.find(',') != std::string_view::npos ? ',' : '\t';
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool is_number(std::string_view cell) {
  try {
    units::parse_double(cell);
    return true;
  } catch (const InvalidArgument&) {
    return false;
  }
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

Table parse_table(std::string_view text, const TableSchema& schema, const std::string& source) {
  struct Binding {
    std::size_t index;
    int exponent;
  };
  std::vector<Binding> bindings;
  bool header_seen = false;
  Table table;
  table.source = source;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? end : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    const auto cells = split_cells(line);
    if (!header_seen) {
      header_seen = true;
      if (!std::all_of(cells.begin(), cells.end(), is_number)) {
        for (const auto& col : schema.columns) {
          bool found = false;
          for (std::size_t i = 0; i < cells.size() && !found; ++i) {
            for (const auto& [name, exponent] : col.headers) {
              if (iequals(cells[i], name)) {
                bindings.push_back({i, exponent});
                found = true;
                break;
              }
            }
          }
          if (!found) {
            std::string accepted;
            for (const auto& h : col.headers) accepted += (accepted.empty() ? "" : ", ") + h.first;
            throw TableError("line " + std::to_string(line_no) + ": missing column '" + col.role +
                             "' (accepted headers: " + accepted + ")",
                             0, 0, source);
          }
        }
        continue;
      }
      for (std::size_t i = 0; i < schema.columns.size(); ++i)
        bindings.push_back({i, schema.columns[i].positional_exponent});
    }

    const std::size_t row_no = table.rows.size() + 1;
    std::vector<double> row;
    row.reserve(bindings.size());
    for (std::size_t c = 0; c < bindings.size(); ++c) {
      const auto& b = bindings[c];
      if (b.index >= cells.size())
        throw TableError("missing column '" + schema.columns[c].role + "'", row_no, line_no, source);
      try {
        row.push_back(units::parse_scaled(cells[b.index], b.exponent));
      } catch (const InvalidArgument&) {
        throw TableError("non-numeric value '" + std::string(cells[b.index]) + "' in column '" +
                             schema.columns[c].role + "'",
                         row_no, line_no, source);
      }
    }
    table.rows.push_back(std::move(row));
    table.lines.push_back(line_no);
  }
  if (table.rows.empty()) throw TableError("table has no data rows", 0, 0, source);
  return table;
}

Table load_table(const std::filesystem::path& path, const TableSchema& schema) {
  return parse_table(read_file(path), schema, path.string());
}

TableSchema spectrum_schema(units::FrequencyUnit positional) {
  return {{
      {"frequency", {{"frequency_mhz", 0}, {"frequency_ghz", 3}}, units::decimal_exponent(positional)},
      {"pl", {{"pl_norm", 0}, {"pl", 0}}, 0},
  }};
}

TableSchema resonance_schema(units::FieldUnit field, units::FrequencyUnit freq) {
  const int fe = units::decimal_exponent(freq);
  return {{
      {"b", {{"b_gauss", 0}, {"b_g", 0}, {"b_mt", 1}}, units::decimal_exponent(field)},
      {"f_minus", {{"f_minus_mhz", 0}, {"f_minus_ghz", 3}}, fe},
      {"f_plus", {{"f_plus_mhz", 0}, {"f_plus_ghz", 3}}, fe},
  }};
}

TableSchema rabi_schema() {
  return {{
      {"tau", {{"tau_ns", 0}}, 0},
      {"signal", {{"signal", 0}}, 0},
  }};
}

TableSchema angle_trace_schema() {
  return {{
      {"theta", {{"theta_deg", 0}}, 0},
      {"tau", {{"tau_ns", 0}}, 0},
      {"signal", {{"signal", 0}}, 0},
  }};
}

std::vector<ResonanceRow> resonance_rows_from(const Table& table) {
  std::vector<ResonanceRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (r[0] < 0.0) throw TableError("negative field magnitude", i + 1, table.lines[i], table.source);
    if (r[1] > r[2]) throw TableError("f_minus exceeds f_plus", i + 1, table.lines[i], table.source);
    rows.push_back({r[0], r[1], r[2]});
  }
  return rows;
}

std::vector<AngleTrace> angle_traces_from(const Table& table) {
  std::vector<AngleTrace> traces;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (r[1] < 0.0) throw TableError("negative delay", i + 1, table.lines[i], table.source);
    if (traces.empty() || traces.back().theta_deg != r[0]) traces.push_back({r[0], {}});
    traces.back().trace.push_back({r[1], r[2]});
  }
  return traces;
}

Trace load_spectrum(const std::filesystem::path& path, units::FrequencyUnit positional) {
  const Table table = load_table(path, spectrum_schema(positional));
  Trace trace;
  for (const auto& r : table.rows) trace.push_back({r[0], r[1]});
  return trace;
}

std::vector<ResonanceRow> load_resonance_rows(const std::filesystem::path& path, units::FieldUnit field,
                                              units::FrequencyUnit freq) {
  return resonance_rows_from(load_table(path, resonance_schema(field, freq)));
}

Trace load_rabi_trace(const std::filesystem::path& path) {
  const Table table = load_table(path, rabi_schema());
  Trace trace;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i][0] < 0.0)
      throw TableError("negative delay", i + 1, table.lines[i], table.source);
    trace.push_back({table.rows[i][0], table.rows[i][1]});
  }
  return trace;
}

std::vector<AngleTrace> load_angle_traces(const std::filesystem::path& path) {
  return angle_traces_from(load_table(path, angle_trace_schema()));
}

std::string format_number(double value) { return fmt::format("{:.12g}", value); }

std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<double>>& rows, char separator) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out.push_back(separator);
    out += header[i];
  }
  out.push_back('\n');
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(separator);
      out += format_number(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace vbodmr
