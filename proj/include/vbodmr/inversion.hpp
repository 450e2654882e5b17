#pragma once

#include "vbodmr/signal_synthesis.hpp"
#include "vbodmr/spin_hamiltonian.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vbodmr {

struct ResonanceRow {
  double b_magnitude = 0.0;  // G
  double f_minus = 0.0;      // MHz
  double f_plus = 0.0;       // MHz
};

// Measured resonance pairs vs field magnitude at one fixed field direction.
// `params` is the starting point; which components are refit is decided by
// AngleFitOptions.
struct ResonanceDataset {
  std::vector<ResonanceRow> rows;
  SpinParams params;
};

// Throws InvalidArgument on fewer than 2 rows, negative fields or
// f_minus > f_plus (naming the 1-based row).
void validate(const ResonanceDataset& data);

enum class FitStatus {
  converged,
  max_iterations,
  stalled,
  at_bound,
  oscillation_free,
  insufficient_span,
};

std::string_view to_string(FitStatus status) noexcept;

struct FitParameter {
  std::string name;
  std::string unit;
  double value = 0.0;
  double variance = 0.0;
  bool fixed = false;
};

struct FitReport {
  std::vector<FitParameter> estimate;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::max_iterations;
  double gradient_measure = 0.0;

  // Throws InvalidArgument for an unknown name.
  const FitParameter& parameter(std::string_view name) const;
  double value(std::string_view name) const { return parameter(name).value; }
};

struct AngleFitOptions {
  bool fit_d_zfs = false;
  bool fit_gamma_e = false;
  double phi_deg = 0.0;
  double grid_step_deg = 0.5;
  int max_iterations = 100;
};

// Sum over rows of squared differences between sorted measured and model
// pairs, with the model evaluated at (b_k, theta, phi) and data.params.
double angle_objective(const ResonanceDataset& data, double theta_deg, double phi_deg = 0.0);

// Fits theta in [0, 90] deg (plus D and gamma_e when freed) by a grid scan
// followed by Levenberg-Marquardt refinement. Parameter names: theta_deg,
// d_zfs_mhz, gamma_e_mhz_per_g. Throws ComputationError when every row has
// zero field (theta unidentifiable).
FitReport fit_angle(const ResonanceDataset& data, const AngleFitOptions& options = {});

struct RabiFitOptions {
  // Impose a = 0 and fit only b exp(-tau/t_b) + c.
  bool no_oscillation = false;
  int max_iterations = 400;
  double gradient_tolerance = 1e-8;
  double min_decay_ns = 0.1;
  double max_decay_ns = 1e6;
  // Oscillation is detected when the dominant spectral amplitude exceeds
  // this multiple of the median amplitude.
  double detection_ratio = 4.0;
};

struct RabiFit {
  RabiModel model;
  FitReport report;  // a, t_a_ns, f_mhz, phi_deg, b, t_b_ns, c
};

// Initial guess used before the nonlinear fit; exposed for testing. Returns
// nullopt when no oscillation is detected.
std::optional<RabiModel> initial_rabi_guess(const Trace& trace, const RabiFitOptions& options = {});

// Least-squares fit of the damped-oscillation model. Throws InvalidArgument
// for fewer than 16 samples or a non-increasing / negative time axis.
RabiFit fit_rabi(const Trace& trace, const RabiFitOptions& options = {});

struct AngleTrace {
  double theta_deg = 0.0;
  Trace trace;
};

struct CoherenceRow {
  double theta_deg = 0.0;
  double t_a = 0.0;          // ns
  double uncertainty = 0.0;  // ns, one standard deviation
  bool ok = false;
  FitStatus status = FitStatus::max_iterations;
  std::string error;  // non-empty when the fit threw
};

// fit_rabi over every trace, in input order. Failures are recorded per row.
std::vector<CoherenceRow> coherence_vs_angle(const std::vector<AngleTrace>& traces,
                                             const RabiFitOptions& options = {});

}  // namespace vbodmr
