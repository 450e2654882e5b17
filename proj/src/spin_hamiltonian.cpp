#include "vbodmr/spin_hamiltonian.hpp"

#include "vbodmr/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace vbodmr {
namespace {

double wrap_degrees(double angle) {
  double wrapped = std::fmod(angle, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  if (wrapped >= 360.0) wrapped = 0.0;
  return wrapped;
}

}  // namespace

void validate(const SpinParams& params) {
  if (!(params.d_zfs >= 0.0) || !std::isfinite(params.d_zfs))
    throw InvalidArgument("zero-field splitting D must be non-negative, got " +
                          std::to_string(params.d_zfs));
  if (!(params.e_strain >= 0.0) || !std::isfinite(params.e_strain))
    throw InvalidArgument("strain splitting E must be non-negative, got " +
                          std::to_string(params.e_strain));
  if (!(params.gamma_e > 0.0) || !std::isfinite(params.gamma_e))
    throw InvalidArgument("gyromagnetic ratio must be positive, got " +
                          std::to_string(params.gamma_e));
}

FieldVector::FieldVector(double magnitude_gauss, double theta_deg, double phi_deg) {
  if (!std::isfinite(magnitude_gauss) || !std::isfinite(theta_deg) || !std::isfinite(phi_deg))
    throw InvalidArgument("field components must be finite");
  if (magnitude_gauss < 0.0)
    throw InvalidArgument("field magnitude must be non-negative, got " +
                          std::to_string(magnitude_gauss));
  magnitude_ = magnitude_gauss;
  theta_ = wrap_degrees(theta_deg);
  phi_ = phi_deg;
  // theta in (180, 360) is the same direction as 360 - theta on the far side.
  if (theta_ > 180.0) {
    theta_ = 360.0 - theta_;
    phi_ += 180.0;
  }
  phi_ = wrap_degrees(phi_);
}

Eigen::Vector3d FieldVector::cartesian() const {
  const double t = units::deg_to_rad(theta_);
  const double p = units::deg_to_rad(phi_);
  return {magnitude_ * std::sin(t) * std::cos(p), magnitude_ * std::sin(t) * std::sin(p),
          magnitude_ * std::cos(t)};
}

const SpinOperators& SpinOperators::spin1() {
  static const SpinOperators ops = [] {
    using cd = std::complex<double>;
    const double r = 1.0 / std::numbers::sqrt2;
    const cd i(0.0, 1.0);
    SpinOperators s;
    s.s_x << 0, r, 0,
             r, 0, r,
             0, r, 0;
    s.s_y << 0.0, -i * r, 0.0,
             i * r, 0.0, -i * r,
             0.0, i * r, 0.0;
    s.s_z << 1, 0, 0,
             0, 0, 0,
             0, 0, -1;
    s.identity = Matrix3c::Identity();
    return s;
  }();
  return ops;
}

Matrix3c hamiltonian_d_zfs(const SpinParams&) {
  const auto& s = SpinOperators::spin1();
  return s.s_z * s.s_z - (2.0 / 3.0) * s.identity;
}

Matrix3c hamiltonian_d_gamma(const FieldVector& field) {
  const auto& s = SpinOperators::spin1();
  const Eigen::Vector3d b = field.cartesian();
  return b.x() * s.s_x + b.y() * s.s_y + b.z() * s.s_z;
}

Matrix3c hamiltonian_d_theta_deg(const SpinParams& params, const FieldVector& field) {
  const auto& s = SpinOperators::spin1();
  const double t = units::deg_to_rad(field.theta());
  const double p = units::deg_to_rad(field.phi());
  const double scale = params.gamma_e * field.magnitude() * std::numbers::pi / 180.0;
  return scale * (std::cos(t) * std::cos(p) * s.s_x + std::cos(t) * std::sin(p) * s.s_y -
                  std::sin(t) * s.s_z);
}

Matrix3c build_hamiltonian(const SpinParams& params, const FieldVector& field) {
  validate(params);
  const auto& s = SpinOperators::spin1();
  Matrix3c h = params.d_zfs * hamiltonian_d_zfs(params) +
               params.e_strain * (s.s_x * s.s_x - s.s_y * s.s_y) +
               params.gamma_e * hamiltonian_d_gamma(field);
  // Remove rounding asymmetry from the operator products.
  return 0.5 * (h + h.adjoint());
}

ResonancePair eigenvalue_gaps(const EigenSystem& system) {
  const auto& l = system.eigenvalues;
  const double g1 = l(1) - l(0);
  const double g2 = l(2) - l(1);
  return {std::min(g1, g2), std::max(g1, g2)};
}

std::size_t bright_state(const EigenSystem& system) {
  std::array<double, 3> weight{};
  for (int k = 0; k < 3; ++k) weight[static_cast<std::size_t>(k)] = std::norm(system.eigenvectors(kMs0, k));
  const auto best = static_cast<std::size_t>(
      std::max_element(weight.begin(), weight.end()) - weight.begin());
  for (std::size_t k = 0; k < 3; ++k) {
    if (k != best && weight[best] - weight[k] <= kBrightTieTolerance) {
      throw AmbiguousLabeling("bright-state labeling is ambiguous: states " + std::to_string(k) +
                                  " and " + std::to_string(best) + " share |<0|v>|^2 = " +
                                  std::to_string(weight[best]),
                              eigenvalue_gaps(system));
    }
  }
  return best;
}

ResonancePair transition_frequencies(const EigenSystem& system) {
  const std::size_t bright = bright_state(system);
  std::array<double, 2> f{};
  std::size_t n = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (k == bright) continue;
    f[n++] = std::abs(system.eigenvalues(static_cast<Eigen::Index>(k)) -
                      system.eigenvalues(static_cast<Eigen::Index>(bright)));
  }
  if (f[0] > f[1]) std::swap(f[0], f[1]);
  return {f[0], f[1]};
}

ResonancePair transition_frequencies(const SpinParams& params, const FieldVector& field) {
  return transition_frequencies(eigensolve(build_hamiltonian(params, field)));
}

ResonancePair transition_frequencies_or_gaps(const SpinParams& params, const FieldVector& field,
                                             bool* labeled) {
  const EigenSystem system = eigensolve(build_hamiltonian(params, field));
  try {
    const ResonancePair pair = transition_frequencies(system);
    if (labeled) *labeled = true;
    return pair;
  } catch (const AmbiguousLabeling& e) {
    if (labeled) *labeled = false;
    return e.eigenvalue_gaps();
  }
}

}  // namespace vbodmr
