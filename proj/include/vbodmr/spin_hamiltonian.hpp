#pragma once

#include "vbodmr/eigensolver.hpp"
#include "vbodmr/error.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace vbodmr {

// Ground-state spin parameters. Frequencies in MHz, gamma_e in MHz/G.
struct SpinParams {
  double d_zfs = 3490.0;
  double e_strain = 50.0;
  double gamma_e = 2.8;
};

// Throws InvalidArgument unless d_zfs >= 0, e_strain >= 0, gamma_e > 0.
// D = 0 is admitted so the pure Zeeman limit can be evaluated.
void validate(const SpinParams& params);

// External field in spherical form: magnitude in Gauss, theta from the
// c-axis and phi in the basal plane, both in degrees. Construction
// normalizes theta to [0, 180] and phi to [0, 360).
class FieldVector {
public:
  FieldVector() = default;
  FieldVector(double magnitude_gauss, double theta_deg, double phi_deg = 0.0);

  double magnitude() const noexcept { return magnitude_; }
  double theta() const noexcept { return theta_; }
  double phi() const noexcept { return phi_; }

  // (B_x, B_y, B_z) in Gauss.
  Eigen::Vector3d cartesian() const;

private:
  double magnitude_ = 0.0;
  double theta_ = 0.0;
  double phi_ = 0.0;
};

// Dimensionless spin-1 operators in the m_s = {+1, 0, -1} basis.
struct SpinOperators {
  Matrix3c s_x;
  Matrix3c s_y;
  Matrix3c s_z;
  Matrix3c identity;

  static const SpinOperators& spin1();
};

// Index of the |m_s = 0> component in the {+1, 0, -1} basis.
inline constexpr Eigen::Index kMs0 = 1;
inline constexpr Eigen::Index kMsPlus1 = 0;
inline constexpr Eigen::Index kMsMinus1 = 2;

// H = D (Sz^2 - 2/3 I) + E (Sx^2 - Sy^2) + gamma_e B.S, in MHz.
Matrix3c build_hamiltonian(const SpinParams& params, const FieldVector& field);

// Partial derivatives of build_hamiltonian, used by gradient-based fits.
Matrix3c hamiltonian_d_theta_deg(const SpinParams& params, const FieldVector& field);
Matrix3c hamiltonian_d_zfs(const SpinParams& params);
Matrix3c hamiltonian_d_gamma(const FieldVector& field);

// The two ODMR transition frequencies, f_minus <= f_plus (MHz).
struct ResonancePair {
  double f_minus = 0.0;
  double f_plus = 0.0;

  double splitting() const noexcept { return f_plus - f_minus; }
  double center() const noexcept { return 0.5 * (f_minus + f_plus); }
};

// Raised when two eigenstates share the largest |<0|v>|^2 within 1e-9, so no
// single bright state exists. Carries the sorted eigenvalue gaps as a
// fallback answer.
class AmbiguousLabeling : public ComputationError {
public:
  AmbiguousLabeling(const std::string& message, ResonancePair gaps)
      : ComputationError(message), gaps_(gaps) {}
  const ResonancePair& eigenvalue_gaps() const noexcept { return gaps_; }

private:
  ResonancePair gaps_;
};

inline constexpr double kBrightTieTolerance = 1e-9;

// Eigenstate with maximal |m_s = 0> weight. Throws AmbiguousLabeling.
std::size_t bright_state(const EigenSystem& system);

// |lambda_k - lambda_bright| for the two other states, ascending.
ResonancePair transition_frequencies(const EigenSystem& system);
ResonancePair transition_frequencies(const SpinParams& params, const FieldVector& field);

// (lambda_2 - lambda_1, lambda_3 - lambda_2) sorted; needs no labeling.
ResonancePair eigenvalue_gaps(const EigenSystem& system);

// transition_frequencies, falling back to eigenvalue_gaps where the bright
// state is ambiguous. `labeled` reports which path produced the pair.
ResonancePair transition_frequencies_or_gaps(const SpinParams& params, const FieldVector& field,
                                             bool* labeled = nullptr);

}  // namespace vbodmr
