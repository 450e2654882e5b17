#include "vbodmr/config.hpp"
#include "vbodmr/error.hpp"
#include "vbodmr/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string units;
  bool verbose = false;
};

std::string key_list() {
  std::string s = "Configuration keys:\n ";
  std::size_t width = 1;
  for (const auto key : vbodmr::config_keys()) {
    if (width + key.size() + 1 > 78) {
      s += "\n ";
      width = 1;
    }
    s += " ";
    s += key;
    width += key.size() + 1;
  }
  return s + "\n";
}

int execute(vbodmr::Mode mode, const Flags& flags) {
  using vbodmr::ExitCode;
  std::ifstream in(flags.config, std::ios::binary);
  if (!in) {
    std::cerr << "config error: cannot open '" << flags.config << "'\n";
    return static_cast<int>(ExitCode::config);
  }
  std::ostringstream text;
  text << in.rdbuf();

  vbodmr::ConfigOverrides overrides;
  overrides.mode = mode;
  overrides.seed = flags.seed;
  if (!flags.out.empty()) overrides.output_dir = flags.out;
  if (!flags.units.empty()) overrides.units = vbodmr::parse_unit_system(flags.units);
  overrides.base_dir = std::filesystem::path(flags.config).parent_path();

  vbodmr::RunConfig config;
  try {
    config = vbodmr::parse_config(text.str(), overrides);
  } catch (const vbodmr::Error& e) {
    std::cerr << "config error: " << flags.config << ": " << e.what() << "\n";
    return static_cast<int>(ExitCode::config);
  }
  return static_cast<int>(vbodmr::run(config, std::cerr, flags.verbose));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-1 ODMR simulation and parameter inversion"};
  app.footer(vbodmr::exit_code_help() + "\n" + key_list());
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vbodmr::kToolVersion));

  Flags flags;
  const std::vector<std::pair<vbodmr::Mode, std::string>> modes{
      {vbodmr::Mode::simulate_spectrum, "Synthesize a normalized ODMR spectrum"},
      {vbodmr::Mode::simulate_rabi, "Synthesize a Rabi trace"},
      {vbodmr::Mode::sweep_field, "Resonance pair versus field magnitude"},
      {vbodmr::Mode::sweep_angle, "Resonance pair versus field angle"},
      {vbodmr::Mode::fit_angle, "Recover the field angle from resonance rows"},
      {vbodmr::Mode::fit_rabi, "Fit the damped Rabi model to a trace"},
      {vbodmr::Mode::fit_coherence_batch, "Fit one Rabi trace per angle"},
  };
  for (const auto& [mode, description] : modes) {
    auto* sub = app.add_subcommand(std::string(vbodmr::to_string(mode)), description);
    sub->add_option("--config", flags.config, "Configuration document")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "Output directory (overrides output_dir)");
    sub->add_option("--seed", flags.seed, "Noise seed (overrides seed)");
    sub->add_option("--units", flags.units, "Unit system of inputs and config values")
        ->check(CLI::IsMember({"si", "lab"}));
    sub->add_flag("--verbose", flags.verbose, "List written files");
    sub->footer(vbodmr::exit_code_help());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(vbodmr::ExitCode::usage);
  }

  for (const auto& [mode, description] : modes) {
    if (app.got_subcommand(std::string(vbodmr::to_string(mode)))) return execute(mode, flags);
  }
  return static_cast<int>(vbodmr::ExitCode::usage);
}
