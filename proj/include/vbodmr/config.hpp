#pragma once

#include "vbodmr/inversion.hpp"
#include "vbodmr/signal_synthesis.hpp"
#include "vbodmr/spin_hamiltonian.hpp"
#include "vbodmr/units.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vbodmr {

enum class Mode {
  simulate_spectrum,
  simulate_rabi,
  sweep_field,
  sweep_angle,
  fit_angle,
  fit_rabi,
  fit_coherence_batch,
};

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view text) noexcept;
bool is_fit_mode(Mode mode) noexcept;

// "lab": Gauss and MHz. "si": millitesla and GHz.
enum class UnitSystem { lab, si };

std::optional<UnitSystem> parse_unit_system(std::string_view text) noexcept;

// Everything a run needs, in canonical units (G, MHz, ns, degrees).
struct RunConfig {
  Mode mode = Mode::simulate_spectrum;
  SpinParams params;
  units::FieldUnit field_unit = units::FieldUnit::gauss;
  units::FrequencyUnit frequency_unit = units::FrequencyUnit::mhz;

  FieldVector field;
  std::vector<double> freq_grid;   // MHz
  std::vector<double> tau_grid;    // ns
  std::vector<double> b_grid;      // G
  std::vector<double> theta_grid;  // deg

  SpectrumModel spectrum;  // resonances are filled in at run time
  RabiModel rabi{1.0, 42.76, 20.0, 0.0, 0.5, 200.0, 0.1};
  double noise_sigma = 0.0;  // signal units; MHz for the sweep modes
  std::uint64_t seed = 0;

  std::string input_as_written;  // echoed in reports
  std::filesystem::path input;   // resolved against the config directory
  std::filesystem::path output_dir = ".";

  AngleFitOptions angle_fit;
  RabiFitOptions rabi_fit;
};

// Values supplied outside the document (CLI flags). A mode or unit system
// given both here and in the document must agree.
struct ConfigOverrides {
  std::optional<Mode> mode;
  std::optional<UnitSystem> units;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::filesystem::path base_dir;  // relative input paths resolve here
};

// Parses a "key = value" document ('#' starts a comment). Unknown or
// repeated keys, malformed numbers, a missing mode and conflicting unit
// declarations raise ConfigError with the line (and column) at fault.
RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});

// Names of every accepted key, for --help.
const std::vector<std::string_view>& config_keys();

}  // namespace vbodmr
