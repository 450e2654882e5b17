#pragma once

#include "vbodmr/inversion.hpp"
#include "vbodmr/signal_synthesis.hpp"
#include "vbodmr/spin_hamiltonian.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace synthetic {

// Resonance rows at fixed direction, with independent Gaussian noise on the
// two branches (seeds `seed` and `seed + 1`).
inline vbodmr::ResonanceDataset resonance_dataset(const std::vector<double>& fields, double theta_deg,
                                                  double phi_deg = 0.0, double sigma = 0.0,
                                                  std::uint64_t seed = 0,
                                                  const vbodmr::SpinParams& params = {}) {
  vbodmr::Trace lo, hi;
  for (const double b : fields) {
    const auto pair = vbodmr::transition_frequencies_or_gaps(params, vbodmr::FieldVector(b, theta_deg, phi_deg));
    lo.push_back({b, pair.f_minus});
    hi.push_back({b, pair.f_plus});
  }
  lo = vbodmr::add_noise(lo, sigma, seed);
  hi = vbodmr::add_noise(hi, sigma, seed + 1);
  vbodmr::ResonanceDataset data;
  data.params = params;
  for (std::size_t i = 0; i < fields.size(); ++i)
    data.rows.push_back({fields[i], std::min(lo[i].y, hi[i].y), std::max(lo[i].y, hi[i].y)});
  return data;
}

inline const std::vector<double> kFig3Fields{40.0, 80.0, 120.0, 167.0};

inline vbodmr::RabiModel reference_rabi() { return {1.0, 42.76, 20.0, 0.0, 0.5, 200.0, 0.1}; }

}  // namespace synthetic
