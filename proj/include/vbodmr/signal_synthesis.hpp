#pragma once

#include "vbodmr/spin_hamiltonian.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace vbodmr {

struct Sample {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

using Trace = std::vector<Sample>;

// Two Lorentzian dips on a flat baseline. Linewidths are FWHM in MHz.
struct SpectrumModel {
  ResonancePair resonances;
  double contrast_minus = 0.02;
  double contrast_plus = 0.02;
  double linewidth_minus = 120.0;
  double linewidth_plus = 120.0;
  double baseline = 1.0;
};

// Throws InvalidArgument unless linewidths > 0, 0 <= contrasts < 1, baseline > 0.
void validate(const SpectrumModel& model);

// Damped Rabi oscillation
//   s(tau) = a exp(-tau/t_a) cos(2 pi f tau + phi) + b exp(-tau/t_b) + c
// with tau and decay times in ns, f in MHz (cycles per microsecond, so the
// argument uses f * 1e-3 per ns) and phi in radians.
struct RabiModel {
  double a = 1.0;
  double t_a = 42.76;
  double f = 20.0;
  double phi = 0.0;
  double b = 0.0;
  double t_b = 200.0;
  double c = 0.0;

  double operator()(double tau_ns) const;
};

// Throws InvalidArgument unless t_a > 0, t_b > 0, f >= 0.
void validate(const RabiModel& model);

// Angular frequency in rad/ns for a Rabi frequency in MHz.
double rabi_angular_frequency(double f_mhz) noexcept;

// Normalized PL on a strictly increasing frequency grid (MHz).
Trace synth_spectrum(const SpectrumModel& model, std::span<const double> freq_grid);

// Rabi trace on a non-negative, non-decreasing time grid (ns).
Trace synth_rabi(const RabiModel& model, std::span<const double> tau_grid);

// Adds N(0, sigma^2) to every y. The result is a pure function of
// (trace, sigma, seed).
Trace add_noise(Trace trace, double sigma, std::uint64_t seed);

// start, start + step, ... up to stop inclusive (with a step/1e9 slack).
std::vector<double> linear_grid(double start, double stop, double step);

}  // namespace vbodmr
