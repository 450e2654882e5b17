#include "vbodmr/eigensolver.hpp"

#include "vbodmr/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

namespace vbodmr {
namespace {

using cd = std::complex<double>;

double off_diagonal_norm(const Matrix3c& a) {
  double sum = 0.0;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q)
      if (p != q) sum += std::norm(a(p, q));
  return std::sqrt(sum);
}

// One complex Jacobi rotation annihilating a(p, q). The unitary is a phase
// on column q (making a(p, q) real) followed by a real plane rotation.
void rotate(Matrix3c& a, Matrix3c& v, int p, int q) {
  const cd apq = a(p, q);
  const double mag = std::abs(apq);
  if (mag == 0.0) return;
  const cd phase = apq / mag;

  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * mag);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  Matrix3c g = Matrix3c::Identity();
  g(p, p) = c;
  g(p, q) = s;
  g(q, p) = -s * std::conj(phase);
  g(q, q) = c * std::conj(phase);

  a = (g.adjoint() * a * g).eval();
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  v = (v * g).eval();
}

void normalize_phase(Eigen::Ref<Eigen::Vector3cd> column) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < 3; ++i)
    if (std::abs(column(i)) > std::abs(column(best)) * (1.0 + 1e-12)) best = i;
  const double mag = std::abs(column(best));
  if (mag == 0.0) return;
  column *= std::conj(column(best)) / mag;
  column(best) = cd(column(best).real(), 0.0);
}

// Replaces the columns [first, first + count) of `vectors`, which span a
// degenerate eigenspace, by the Gram-Schmidt projections of |+1>, |0>, |-1>.
void canonicalize_degenerate(Matrix3c& vectors, int first, int count) {
  const Eigen::MatrixXcd q = vectors.middleCols(first, count);
  const Eigen::MatrixXcd projector = q * q.adjoint();
  std::vector<Eigen::Vector3cd> chosen;
  for (int basis = 0; basis < 3 && static_cast<int>(chosen.size()) < count; ++basis) {
    Eigen::Vector3cd w = projector.col(basis);
    for (const auto& u : chosen) w -= u * u.dot(w);
    const double n = w.norm();
    if (n > 1e-6) chosen.push_back(w / n);
  }
  if (static_cast<int>(chosen.size()) != count) return;
  for (int k = 0; k < count; ++k) vectors.col(first + k) = chosen[static_cast<std::size_t>(k)];
}

}  // namespace

EigenSystem eigensolve(const Matrix3c& h, const EigensolveOptions& options) {
  if (!h.allFinite()) throw InvalidArgument("eigensolve: matrix has non-finite entries");
  const double scale = h.cwiseAbs().maxCoeff();
  const double asymmetry = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (asymmetry > options.hermitian_tolerance * scale) {
    throw InvalidArgument("eigensolve: matrix is not Hermitian (max |H - H^H| = " +
                          std::to_string(asymmetry) + ")");
  }

  Matrix3c a = 0.5 * (h + h.adjoint());
  Matrix3c v = Matrix3c::Identity();
  const double norm = a.norm();

  bool converged = norm == 0.0;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    if (off_diagonal_norm(a) <= options.off_diagonal_tolerance * norm) {
      converged = true;
      break;
    }
    rotate(a, v, 0, 1);
    rotate(a, v, 0, 2);
    rotate(a, v, 1, 2);
  }
  if (!converged && off_diagonal_norm(a) > options.off_diagonal_tolerance * norm) {
    throw ComputationError("eigensolve: Jacobi iteration did not converge in " +
                           std::to_string(options.max_sweeps) + " sweeps");
  }

  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });

  EigenSystem out;
  for (int k = 0; k < 3; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]).real();
    out.eigenvectors.col(k) = v.col(order[k]);
  }

  const double degenerate_gap = 1e-10 * std::max(norm, 1e-300);
  int first = 0;
  while (first < 3) {
    int last = first + 1;
    while (last < 3 && out.eigenvalues(last) - out.eigenvalues(last - 1) <= degenerate_gap) ++last;
    if (last - first > 1) canonicalize_degenerate(out.eigenvectors, first, last - first);
    first = last;
  }

  for (int k = 0; k < 3; ++k) normalize_phase(out.eigenvectors.col(k));
  return out;
}

}  // namespace vbodmr
