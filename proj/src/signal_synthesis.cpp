#include "vbodmr/signal_synthesis.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace vbodmr {

void validate(const SpectrumModel& model) {
  if (!(model.linewidth_minus > 0.0) || !(model.linewidth_plus > 0.0))
    throw InvalidArgument("dip linewidths must be positive");
  if (!(model.contrast_minus >= 0.0 && model.contrast_minus < 1.0) ||
      !(model.contrast_plus >= 0.0 && model.contrast_plus < 1.0))
    throw InvalidArgument("dip contrasts must lie in [0, 1)");
  if (!(model.baseline > 0.0)) throw InvalidArgument("baseline must be positive");
}

void validate(const RabiModel& model) {
  if (!(model.t_a > 0.0) || !(model.t_b > 0.0))
    throw InvalidArgument("Rabi decay times must be positive");
  if (!(model.f >= 0.0)) throw InvalidArgument("Rabi frequency must be non-negative");
}

double rabi_angular_frequency(double f_mhz) noexcept {
  return 2.0 * std::numbers::pi * f_mhz * 1e-3;
}

double RabiModel::operator()(double tau) const {
  return a * std::exp(-tau / t_a) * std::cos(rabi_angular_frequency(f) * tau + phi) +
         b * std::exp(-tau / t_b) + c;
}

Trace synth_spectrum(const SpectrumModel& model, std::span<const double> freq_grid) {
  validate(model);
  if (freq_grid.empty()) throw InvalidArgument("frequency grid is empty");
  for (std::size_t i = 1; i < freq_grid.size(); ++i)
    if (!(freq_grid[i] > freq_grid[i - 1]))
      throw InvalidArgument("frequency grid is not strictly increasing at index " +
                            std::to_string(i));

  const auto dip = [](double f, double center, double contrast, double fwhm) {
    const double hw2 = 0.25 * fwhm * fwhm;
    return contrast * hw2 / ((f - center) * (f - center) + hw2);
  };

  Trace out;
  out.reserve(freq_grid.size());
  for (const double f : freq_grid) {
    const double pl = model.baseline -
                      dip(f, model.resonances.f_minus, model.contrast_minus, model.linewidth_minus) -
                      dip(f, model.resonances.f_plus, model.contrast_plus, model.linewidth_plus);
    out.push_back({f, pl});
  }
  return out;
}

Trace synth_rabi(const RabiModel& model, std::span<const double> tau_grid) {
  validate(model);
  if (tau_grid.empty()) throw InvalidArgument("time grid is empty");
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (tau_grid[i] < 0.0)
      throw InvalidArgument("negative delay " + std::to_string(tau_grid[i]) + " ns at index " +
                            std::to_string(i));
    if (i > 0 && tau_grid[i] < tau_grid[i - 1])
      throw InvalidArgument("time grid decreases at index " + std::to_string(i));
  }
  Trace out;
  out.reserve(tau_grid.size());
  for (const double tau : tau_grid) out.push_back({tau, model(tau)});
  return out;
}

Trace add_noise(Trace trace, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  if (sigma == 0.0) return trace;
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (auto& s : trace) s.y += normal(engine);
  return trace;
}

std::vector<double> linear_grid(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
    throw InvalidArgument("grid bounds must be finite");
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  if (stop < start) throw InvalidArgument("grid stop precedes start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 10'000'000) throw InvalidArgument("grid has too many points");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = start + static_cast<double>(i) * step;
  return grid;
}

}  // namespace vbodmr
