#pragma once

#include <Eigen/Dense>

namespace vbodmr {

using Matrix3c = Eigen::Matrix3cd;

// Spectrum of a 3x3 Hermitian matrix.
//
// `eigenvalues` are ascending. Column i of `eigenvectors` is the unit
// eigenvector for eigenvalues(i), expressed in the {+1, 0, -1} basis, with
// its largest-magnitude component made real and positive. Inside a
// degenerate eigenvalue group the basis is fixed by projecting |+1>, |0>,
// |-1> (in that order) onto the eigenspace.
struct EigenSystem {
  Eigen::Vector3d eigenvalues;
  Matrix3c eigenvectors;
};

struct EigensolveOptions {
  double off_diagonal_tolerance = 1e-13;  // relative to the Frobenius norm
  int max_sweeps = 100;
  double hermitian_tolerance = 1e-9;      // relative
};

// Cyclic complex Jacobi diagonalization. Throws InvalidArgument for input
// that is not Hermitian within `hermitian_tolerance`, ComputationError when
// the sweep cap is hit.
EigenSystem eigensolve(const Matrix3c& h, const EigensolveOptions& options = {});

}  // namespace vbodmr
