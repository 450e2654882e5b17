#include "vbodmr/config.hpp"

#include "vbodmr/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <charconv>
#include <map>
#include <string>

namespace vbodmr {

namespace {

constexpr std::array<std::pair<Mode, std::string_view>, 7> kModeNames{{
    {Mode::simulate_spectrum, "simulate-spectrum"},
    {Mode::simulate_rabi, "simulate-rabi"},
    {Mode::sweep_field, "sweep-field"},
    {Mode::sweep_angle, "sweep-angle"},
    {Mode::fit_angle, "fit-angle"},
    {Mode::fit_rabi, "fit-rabi"},
    {Mode::fit_coherence_batch, "fit-coherence-batch"},
}};

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  for (const auto& [m, name] : kModeNames)
    if (m == mode) return name;
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text) noexcept {
  for (const auto& [m, name] : kModeNames)
    if (name == text) return m;
  return std::nullopt;
}

bool is_fit_mode(Mode mode) noexcept {
  return mode == Mode::fit_angle || mode == Mode::fit_rabi || mode == Mode::fit_coherence_batch;
}

std::optional<UnitSystem> parse_unit_system(std::string_view text) noexcept {
  if (text == "lab") return UnitSystem::lab;
  if (text == "si") return UnitSystem::si;
  return std::nullopt;
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys{
      "mode", "units", "field_units", "freq_units",
      "d", "e", "gamma_e",
      "b", "theta", "phi",
      "freq_start", "freq_stop", "freq_step", "freq_values",
      "tau_start", "tau_stop", "tau_step", "tau_values",
      "b_start", "b_stop", "b_step", "b_values",
      "theta_start", "theta_stop", "theta_step", "theta_values",
      "contrast_minus", "contrast_plus", "linewidth_minus", "linewidth_plus", "baseline",
      "rabi_a", "rabi_t_a", "rabi_f", "rabi_phi", "rabi_b", "rabi_t_b", "rabi_c",
      "noise_sigma", "seed", "input", "output_dir",
      "fit_free", "fit_grid_step", "fit_max_iterations",
  };
  return keys;
}

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
  std::size_t column = 0;  // of the value
};

std::string_view trim(std::string_view s, std::size_t* offset = nullptr) {
  std::size_t lead = 0;
  while (lead < s.size() && std::isspace(static_cast<unsigned char>(s[lead]))) ++lead;
  s.remove_prefix(lead);
  if (offset) *offset += lead;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class Document {
public:
  explicit Document(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto end = text.find('\n', pos);
      std::string_view line = text.substr(pos, end == std::string_view::npos ? end : end - pos);
      pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      std::size_t offset = 0;
      const std::string_view content = trim(line, &offset);
      if (content.empty()) continue;
      const auto eq = content.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("expected 'key = value'", line_no, offset + 1);
      const std::string key(trim(content.substr(0, eq)));
      if (key.empty()) throw ConfigError("missing key before '='", line_no, offset + 1);
      const auto& known = config_keys();
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ConfigError("unknown key '" + key + "'", line_no, offset + 1);
      std::size_t value_offset = offset + eq + 1;
      const std::string value(trim(content.substr(eq + 1), &value_offset));
      if (entries_.count(key))
        throw ConfigError("duplicate key '" + key + "' (first set on line " +
                              std::to_string(entries_[key].line) + ")",
                          line_no, offset + 1);
      entries_[key] = {value, line_no, value_offset + 1};
    }
  }

  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

private:
  std::map<std::string, Entry> entries_;
};

// Value readers bound to one document; every error names the line/column.
class Reader {
public:
  explicit Reader(const Document& doc) : doc_(doc) {}

  double number(const std::string& key, double fallback, int exponent = 0) const {
    const Entry* e = doc_.find(key);
    return e ? parse_number(*e, key, exponent) : fallback;
  }

  std::optional<double> optional_number(const std::string& key, int exponent = 0) const {
    const Entry* e = doc_.find(key);
    if (!e) return std::nullopt;
    return parse_number(*e, key, exponent);
  }

  std::vector<double> list(const Entry& e, const std::string& key, int exponent) const {
    std::vector<double> out;
    std::string_view rest = e.value;
    std::size_t col = e.column;
    if (trim(rest).empty()) throw ConfigError("'" + key + "' is empty", e.line, e.column);
    for (;;) {
      const auto comma = rest.find(',');
      std::size_t offset = 0;
      const std::string_view item = trim(rest.substr(0, comma), &offset);
      out.push_back(parse_number({std::string(item), e.line, col + offset}, key, exponent));
      if (comma == std::string_view::npos) break;
      col += comma + 1;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    const Entry* e = doc_.find(key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last)
      throw ConfigError("'" + key + "' must be a non-negative integer, got '" + e->value + "'", e->line,
                        e->column);
    return v;
  }

private:
  static double parse_number(const Entry& e, const std::string& key, int exponent) {
    try {
      return units::parse_scaled(e.value, exponent);
    } catch (const InvalidArgument&) {
      throw ConfigError("malformed number '" + e.value + "' for '" + key + "'", e.line, e.column);
    }
  }

  const Document& doc_;
};

std::vector<double> read_grid(const Document& doc, const Reader& reader, const std::string& prefix,
                              int exponent, double start, double stop, double step) {
  const Entry* values = doc.find(prefix + "_values");
  const Entry* any_range = doc.find(prefix + "_start");
  if (!any_range) any_range = doc.find(prefix + "_stop");
  if (!any_range) any_range = doc.find(prefix + "_step");
  if (values && any_range)
    throw ConfigError("'" + prefix + "_values' conflicts with the " + prefix + "_start/stop/step range",
                      values->line, values->column);
  if (values) {
    std::vector<double> grid = reader.list(*values, prefix + "_values", exponent);
    return grid;
  }
  const double lo = reader.number(prefix + "_start", start, exponent);
  const double hi = reader.number(prefix + "_stop", stop, exponent);
  const double dx = reader.number(prefix + "_step", step, exponent);
  try {
    return linear_grid(lo, hi, dx);
  } catch (const InvalidArgument& e) {
    const std::size_t line = any_range ? any_range->line : 0;
    throw ConfigError(prefix + " grid: " + e.what(), line);
  }
}

}  // namespace

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  const Document doc(text);
  const Reader reader(doc);
  RunConfig cfg;

  // Mode.
  const Entry* mode_entry = doc.find("mode");
  if (mode_entry) {
    const auto mode = parse_mode(mode_entry->value);
    if (!mode)
      throw ConfigError("unknown mode '" + mode_entry->value + "'", mode_entry->line, mode_entry->column);
    if (overrides.mode && *overrides.mode != *mode)
      throw ConfigError("document mode '" + mode_entry->value + "' conflicts with subcommand '" +
                            std::string(to_string(*overrides.mode)) + "'",
                        mode_entry->line, mode_entry->column);
    cfg.mode = *mode;
  } else if (overrides.mode) {
    cfg.mode = *overrides.mode;
  } else {
    throw ConfigError("missing 'mode'", 0);
  }

  // Units: a unit system and explicit per-quantity units must agree.
  std::optional<UnitSystem> system;
  std::size_t system_line = 0;
  if (const Entry* e = doc.find("units")) {
    system = parse_unit_system(e->value);
    if (!system) throw ConfigError("unknown unit system '" + e->value + "' (expected lab or si)", e->line, e->column);
    system_line = e->line;
    if (overrides.units && *overrides.units != *system)
      throw ConfigError("conflicting unit declarations: document says '" + e->value +
                            "' but --units says '" + (*overrides.units == UnitSystem::si ? "si" : "lab") + "'",
                        e->line, e->column);
  } else if (overrides.units) {
    system = overrides.units;
  }
  if (system == UnitSystem::si) {
    cfg.field_unit = units::FieldUnit::millitesla;
    cfg.frequency_unit = units::FrequencyUnit::ghz;
  }
  if (const Entry* e = doc.find("field_units")) {
    units::FieldUnit unit;
    try {
      unit = units::parse_field_unit(e->value);
    } catch (const InvalidArgument& err) {
      throw ConfigError(err.what(), e->line, e->column);
    }
    if (system && unit != cfg.field_unit)
      throw ConfigError("conflicting unit declarations: field_units = " + e->value +
                            " contradicts the unit system" +
                            (system_line ? " on line " + std::to_string(system_line) : std::string(" from --units")),
                        e->line, e->column);
    cfg.field_unit = unit;
  }
  if (const Entry* e = doc.find("freq_units")) {
    units::FrequencyUnit unit;
    try {
      unit = units::parse_frequency_unit(e->value);
    } catch (const InvalidArgument& err) {
      throw ConfigError(err.what(), e->line, e->column);
    }
    if (system && unit != cfg.frequency_unit)
      throw ConfigError("conflicting unit declarations: freq_units = " + e->value +
                            " contradicts the unit system" +
                            (system_line ? " on line " + std::to_string(system_line) : std::string(" from --units")),
                        e->line, e->column);
    cfg.frequency_unit = unit;
  }
  const int fe = units::decimal_exponent(cfg.frequency_unit);
  const int be = units::decimal_exponent(cfg.field_unit);

  // Spin parameters.
  cfg.params.d_zfs = reader.number("d", cfg.params.d_zfs, fe);
  cfg.params.e_strain = reader.number("e", cfg.params.e_strain, fe);
  cfg.params.gamma_e = reader.number("gamma_e", cfg.params.gamma_e);
  try {
    validate(cfg.params);
  } catch (const InvalidArgument& e) {
    const Entry* where = doc.find("d") ? doc.find("d") : doc.find("e") ? doc.find("e") : doc.find("gamma_e");
    throw ConfigError(e.what(), where ? where->line : 0);
  }

  // Field.
  try {
    cfg.field = FieldVector(reader.number("b", 0.0, be), reader.number("theta", 0.0), reader.number("phi", 0.0));
  } catch (const InvalidArgument& e) {
    const Entry* where = doc.find("b");
    throw ConfigError(e.what(), where ? where->line : 0, where ? where->column : 0);
  }

  // Grids.
  cfg.freq_grid = read_grid(doc, reader, "freq", fe, 3000.0, 4000.0, 1.0);
  cfg.tau_grid = read_grid(doc, reader, "tau", 0, 0.0, 200.0, 1.0);
  cfg.b_grid = read_grid(doc, reader, "b", be, 0.0, 200.0, 2.0);
  cfg.theta_grid = read_grid(doc, reader, "theta", 0, 0.0, 90.0, 1.0);
  const auto grid_line = [&](const std::string& prefix) -> std::size_t {
    for (const char* suffix : {"_values", "_start", "_stop", "_step"})
      if (const Entry* e = doc.find(prefix + suffix)) return e->line;
    return 0;
  };
  for (const auto& [prefix, grid] : {std::pair<std::string, const std::vector<double>*>{"b", &cfg.b_grid},
                                     {"tau", &cfg.tau_grid}}) {
    if (std::any_of(grid->begin(), grid->end(), [](double x) { return x < 0.0; }))
      throw ConfigError(prefix + " grid has a negative value", grid_line(prefix));
  }
  for (const auto& [prefix, grid] : {std::pair<std::string, const std::vector<double>*>{"freq", &cfg.freq_grid},
                                     {"tau", &cfg.tau_grid}}) {
    if (std::adjacent_find(grid->begin(), grid->end(), std::greater_equal<>()) != grid->end())
      throw ConfigError(prefix + " grid must be strictly increasing", grid_line(prefix));
  }

  // Synthesis models.
  cfg.spectrum.contrast_minus = reader.number("contrast_minus", cfg.spectrum.contrast_minus);
  cfg.spectrum.contrast_plus = reader.number("contrast_plus", cfg.spectrum.contrast_plus);
  cfg.spectrum.linewidth_minus = reader.number("linewidth_minus", cfg.spectrum.linewidth_minus, fe);
  cfg.spectrum.linewidth_plus = reader.number("linewidth_plus", cfg.spectrum.linewidth_plus, fe);
  cfg.spectrum.baseline = reader.number("baseline", cfg.spectrum.baseline);
  try {
    validate(cfg.spectrum);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what(), 0);
  }

  cfg.rabi.a = reader.number("rabi_a", cfg.rabi.a);
  cfg.rabi.t_a = reader.number("rabi_t_a", cfg.rabi.t_a);
  cfg.rabi.f = reader.number("rabi_f", cfg.rabi.f);
  cfg.rabi.phi = units::deg_to_rad(reader.number("rabi_phi", units::rad_to_deg(cfg.rabi.phi)));
  cfg.rabi.b = reader.number("rabi_b", cfg.rabi.b);
  cfg.rabi.t_b = reader.number("rabi_t_b", cfg.rabi.t_b);
  cfg.rabi.c = reader.number("rabi_c", cfg.rabi.c);
  try {
    validate(cfg.rabi);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what(), 0);
  }

  // Sweep noise is a frequency; synthesis noise is in signal units.
  const bool sweep = cfg.mode == Mode::sweep_field || cfg.mode == Mode::sweep_angle;
  cfg.noise_sigma = reader.number("noise_sigma", 0.0, sweep ? fe : 0);
  if (cfg.noise_sigma < 0.0) {
    const Entry* e = doc.find("noise_sigma");
    throw ConfigError("noise_sigma must be non-negative", e->line, e->column);
  }
  cfg.seed = overrides.seed ? *overrides.seed : reader.unsigned_integer("seed", 0);

  // Paths.
  if (const Entry* e = doc.find("input")) {
    if (e->value.empty()) throw ConfigError("'input' is empty", e->line, e->column);
    cfg.input_as_written = e->value;
    const std::filesystem::path p(e->value);
    cfg.input = p.is_absolute() || overrides.base_dir.empty() ? p : overrides.base_dir / p;
  }
  if (is_fit_mode(cfg.mode) && cfg.input.empty())
    throw ConfigError(std::string(to_string(cfg.mode)) + " requires 'input'", 0);
  if (const Entry* e = doc.find("output_dir")) {
    if (e->value.empty()) throw ConfigError("'output_dir' is empty", e->line, e->column);
    const std::filesystem::path p(e->value);
    cfg.output_dir = p.is_absolute() || overrides.base_dir.empty() ? p : overrides.base_dir / p;
  }
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;

  // Fit options.
  if (const Entry* e = doc.find("fit_free")) {
    std::string_view rest = e->value;
    for (;;) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      if (item == "d") {
        cfg.angle_fit.fit_d_zfs = true;
      } else if (item == "gamma_e") {
        cfg.angle_fit.fit_gamma_e = true;
      } else if (item != "none" && !item.empty()) {
        throw ConfigError("fit_free accepts d, gamma_e or none; got '" + std::string(item) + "'", e->line,
                          e->column);
      }
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  cfg.angle_fit.phi_deg = cfg.field.phi();
  cfg.angle_fit.grid_step_deg = reader.number("fit_grid_step", cfg.angle_fit.grid_step_deg);
  if (!(cfg.angle_fit.grid_step_deg > 0.0 && cfg.angle_fit.grid_step_deg <= 90.0)) {
    const Entry* e = doc.find("fit_grid_step");
    throw ConfigError("fit_grid_step must lie in (0, 90]", e ? e->line : 0, e ? e->column : 0);
  }
  const auto iterations = reader.unsigned_integer("fit_max_iterations", 0);
  if (iterations > 0) {
    cfg.angle_fit.max_iterations = static_cast<int>(std::min<std::uint64_t>(iterations, 100000));
    cfg.rabi_fit.max_iterations = cfg.angle_fit.max_iterations;
  }
  return cfg;
}

}  // namespace vbodmr
