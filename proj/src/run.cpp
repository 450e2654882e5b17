#include "vbodmr/run.hpp"

#include "vbodmr/error.hpp"
#include "vbodmr/table.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <system_error>

namespace vbodmr {

std::string exit_code_help() {
  return "Exit codes:\n"
         "  0  success\n"
         "  1  invalid command line\n"
         "  2  malformed configuration document\n"
         "  3  malformed or unreadable input table\n"
         "  4  model or fit rejected its input\n"
         "  5  output could not be written\n"
         "  6  unexpected internal error\n"
         "  7  outputs written, but a fit did not converge\n";
}

std::string format_report(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [key, value] : entries) out += key + " = " + value + "\n";
  return out;
}

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

std::string flag(bool b) { return b ? "true" : "false"; }

Entries report_header(const RunConfig& cfg) {
  Entries e{
      {"tool", std::string(kToolName)},
      {"version", std::string(kToolVersion)},
      {"mode", std::string(to_string(cfg.mode))},
      {"seed", std::to_string(cfg.seed)},
      {"field_units", std::string(units::name(cfg.field_unit))},
      {"freq_units", std::string(units::name(cfg.frequency_unit))},
  };
  if (!cfg.input_as_written.empty()) e.emplace_back("input", cfg.input_as_written);
  e.emplace_back("param_d_zfs_mhz", format_number(cfg.params.d_zfs));
  e.emplace_back("param_e_strain_mhz", format_number(cfg.params.e_strain));
  e.emplace_back("param_gamma_e_mhz_per_g", format_number(cfg.params.gamma_e));
  return e;
}

void append_estimates(Entries& e, const FitReport& report, bool include_fixed) {
  for (const auto& p : report.estimate) {
    if (p.fixed && !include_fixed) continue;
    e.emplace_back(p.name, format_number(p.value));
    if (!p.fixed) e.emplace_back(p.name + "_stderr", format_number(std::sqrt(p.variance)));
  }
}

void append_fit_summary(Entries& e, const FitReport& report, const std::string& rms_key) {
  e.emplace_back(rms_key, format_number(report.residual_rms));
  e.emplace_back("iterations", std::to_string(report.iterations));
  e.emplace_back("converged", flag(report.converged));
  e.emplace_back("status", std::string(to_string(report.status)));
}

std::vector<std::vector<double>> rows_of(const Trace& trace) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.size());
  for (const auto& s : trace) rows.push_back({s.x, s.y});
  return rows;
}

struct SweepPoint {
  ResonancePair pair;
  bool labeled = true;
};

// Adds independent noise to both branches (seeds seed and seed + 1) and
// restores the f_minus <= f_plus order.
void perturb(std::vector<SweepPoint>& points, double sigma, std::uint64_t seed) {
  if (sigma == 0.0) return;
  Trace minus, plus;
  for (std::size_t i = 0; i < points.size(); ++i) {
    minus.push_back({static_cast<double>(i), points[i].pair.f_minus});
    plus.push_back({static_cast<double>(i), points[i].pair.f_plus});
  }
  minus = add_noise(std::move(minus), sigma, seed);
  plus = add_noise(std::move(plus), sigma, seed + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double lo = std::min(minus[i].y, plus[i].y);
    const double hi = std::max(minus[i].y, plus[i].y);
    points[i].pair = {lo, hi};
  }
}

std::string sweep_table(const std::string& axis, const std::vector<double>& grid,
                        const std::vector<SweepPoint>& points) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& p = points[i];
    rows.push_back({grid[i], p.pair.f_minus, p.pair.f_plus, p.pair.splitting(), p.labeled ? 1.0 : 0.0});
  }
  return format_table({axis, "f_minus_mhz", "f_plus_mhz", "splitting_mhz", "labeled"}, rows);
}

RunOutcome simulate_spectrum(const RunConfig& cfg) {
  SpectrumModel model = cfg.spectrum;
  model.resonances = transition_frequencies_or_gaps(cfg.params, cfg.field);
  const Trace trace = add_noise(synth_spectrum(model, cfg.freq_grid), cfg.noise_sigma, cfg.seed);
  return {{{"spectrum.csv", format_table({"frequency_mhz", "pl_norm"}, rows_of(trace))}}, true};
}

RunOutcome simulate_rabi(const RunConfig& cfg) {
  const Trace trace = add_noise(synth_rabi(cfg.rabi, cfg.tau_grid), cfg.noise_sigma, cfg.seed);
  return {{{"rabi.csv", format_table({"tau_ns", "signal"}, rows_of(trace))}}, true};
}

RunOutcome sweep_field(const RunConfig& cfg) {
  std::vector<SweepPoint> points;
  for (const double b : cfg.b_grid) {
    SweepPoint p;
    p.pair = transition_frequencies_or_gaps(cfg.params, FieldVector(b, cfg.field.theta(), cfg.field.phi()),
                                            &p.labeled);
    points.push_back(p);
  }
  perturb(points, cfg.noise_sigma, cfg.seed);
  return {{{"sweep_field.csv", sweep_table("b_gauss", cfg.b_grid, points)}}, true};
}

RunOutcome sweep_angle(const RunConfig& cfg) {
  std::vector<SweepPoint> points;
  for (const double theta : cfg.theta_grid) {
    SweepPoint p;
    p.pair = transition_frequencies_or_gaps(cfg.params, FieldVector(cfg.field.magnitude(), theta, cfg.field.phi()),
                                            &p.labeled);
    points.push_back(p);
  }
  perturb(points, cfg.noise_sigma, cfg.seed);
  return {{{"sweep_angle.csv", sweep_table("theta_deg", cfg.theta_grid, points)}}, true};
}

RunOutcome run_fit_angle(const RunConfig& cfg) {
  ResonanceDataset data{load_resonance_rows(cfg.input, cfg.field_unit, cfg.frequency_unit), cfg.params};
  const FitReport report = fit_angle(data, cfg.angle_fit);

  SpinParams fitted = cfg.params;
  fitted.d_zfs = report.value("d_zfs_mhz");
  fitted.gamma_e = report.value("gamma_e_mhz_per_g");
  const double theta = report.value("theta_deg");
  std::vector<std::vector<double>> rows;
  for (const auto& row : data.rows) {
    const ResonancePair model =
        transition_frequencies_or_gaps(fitted, FieldVector(row.b_magnitude, theta, cfg.angle_fit.phi_deg));
    rows.push_back({row.b_magnitude, row.f_minus, row.f_plus, model.f_minus, model.f_plus});
  }

  Entries e = report_header(cfg);
  e.emplace_back("rows", std::to_string(data.rows.size()));
  e.emplace_back("phi_deg", format_number(cfg.angle_fit.phi_deg));
  std::string free = std::string(cfg.angle_fit.fit_d_zfs ? "d" : "") +
                     (cfg.angle_fit.fit_d_zfs && cfg.angle_fit.fit_gamma_e ? "," : "") +
                     (cfg.angle_fit.fit_gamma_e ? "gamma_e" : "");
  e.emplace_back("fit_free", free.empty() ? "none" : free);
  append_estimates(e, report, false);
  append_fit_summary(e, report, "residual_rms_mhz");

  RunOutcome out;
  out.artifacts.push_back({"fit_angle_report.txt", format_report(e)});
  out.artifacts.push_back(
      {"fit_angle_curve.csv",
       format_table({"b_gauss", "f_minus_mhz", "f_plus_mhz", "model_f_minus_mhz", "model_f_plus_mhz"}, rows)});
  out.converged = report.converged;
  return out;
}

RunOutcome run_fit_rabi(const RunConfig& cfg) {
  const Trace trace = load_rabi_trace(cfg.input);
  const RabiFit fit = fit_rabi(trace, cfg.rabi_fit);

  std::vector<std::vector<double>> rows;
  for (const auto& s : trace) rows.push_back({s.x, s.y, fit.model(s.x)});

  Entries e = report_header(cfg);
  e.emplace_back("samples", std::to_string(trace.size()));
  append_estimates(e, fit.report, true);
  append_fit_summary(e, fit.report, "residual_rms");

  RunOutcome out;
  out.artifacts.push_back({"fit_rabi_report.txt", format_report(e)});
  out.artifacts.push_back({"fit_rabi_curve.csv", format_table({"tau_ns", "signal", "model"}, rows)});
  out.converged = fit.report.converged;
  return out;
}

RunOutcome run_fit_coherence(const RunConfig& cfg) {
  const auto traces = load_angle_traces(cfg.input);
  const auto results = coherence_vs_angle(traces, cfg.rabi_fit);

  std::vector<std::vector<double>> rows;
  Entries e = report_header(cfg);
  e.emplace_back("traces", std::to_string(results.size()));
  std::size_t ok = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    rows.push_back({r.theta_deg, r.t_a, r.uncertainty, r.ok ? 1.0 : 0.0});
    const std::string prefix = "trace_" + std::to_string(i + 1) + "_";
    e.emplace_back(prefix + "theta_deg", format_number(r.theta_deg));
    e.emplace_back(prefix + "t_a_ns", format_number(r.t_a));
    e.emplace_back(prefix + "t_a_ns_stderr", format_number(r.uncertainty));
    e.emplace_back(prefix + "converged", flag(r.ok));
    e.emplace_back(prefix + "status", r.error.empty() ? std::string(to_string(r.status)) : "error: " + r.error);
    if (r.ok) ++ok;
  }
  e.emplace_back("converged_traces", std::to_string(ok));
  e.emplace_back("converged", flag(ok == results.size()));

  RunOutcome out;
  out.artifacts.push_back({"coherence.csv", format_table({"theta_deg", "t_a_ns", "t_a_stderr_ns", "converged"}, rows)});
  out.artifacts.push_back({"coherence_report.txt", format_report(e)});
  out.converged = ok == results.size();
  return out;
}

}  // namespace

RunOutcome execute(const RunConfig& config) {
  switch (config.mode) {
    case Mode::simulate_spectrum: return simulate_spectrum(config);
    case Mode::simulate_rabi: return simulate_rabi(config);
    case Mode::sweep_field: return sweep_field(config);
    case Mode::sweep_angle: return sweep_angle(config);
    case Mode::fit_angle: return run_fit_angle(config);
    case Mode::fit_rabi: return run_fit_rabi(config);
    case Mode::fit_coherence_batch: return run_fit_coherence(config);
  }
  throw InvalidArgument("unknown mode");
}

void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> staged;
  const auto discard = [&] {
    for (const auto& p : staged) std::filesystem::remove(p, ec);
  };
  for (const auto& a : artifacts) {
    const auto tmp = dir / (a.name + ".partial");
    staged.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << a.content;
    out.close();
    if (!out) {
      discard();
      throw IoError("cannot write '" + tmp.string() + "'");
    }
  }
  for (const auto& a : artifacts) {
    if (std::filesystem::is_directory(dir / a.name)) {
      discard();
      throw IoError("'" + (dir / a.name).string() + "' is a directory");
    }
  }
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    std::filesystem::rename(staged[i], dir / artifacts[i].name, ec);
    if (ec) {
      const std::string message = ec.message();
      discard();
      for (std::size_t j = 0; j < i; ++j) std::filesystem::remove(dir / artifacts[j].name, ec);
      throw IoError("cannot rename into '" + (dir / artifacts[i].name).string() + "': " + message);
    }
  }
}

ExitCode run(const RunConfig& config, std::ostream& err, bool verbose) {
  try {
    const RunOutcome outcome = execute(config);
    write_artifacts(config.output_dir, outcome.artifacts);
    if (verbose)
      for (const auto& a : outcome.artifacts) err << "wrote " << (config.output_dir / a.name).string() << "\n";
    if (!outcome.converged) {
      err << "warning: fit did not converge; see the report\n";
      return ExitCode::not_converged;
    }
    return ExitCode::ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ExitCode::config;
  } catch (const TableError& e) {
    err << "input error: " << e.what() << "\n";
    return ExitCode::input;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return ExitCode::io;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::computation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return ExitCode::internal;
  }
}

}  // namespace vbodmr
