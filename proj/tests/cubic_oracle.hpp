#pragma once

// Independent reference for 3x3 Hermitian spectra: roots of the
// characteristic polynomial by the trigonometric cubic formula, evaluated in
// extended precision and polished with Newton steps on the polynomial.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using real = long double;

struct Cubic {
  // lambda^3 + c2 lambda^2 + c1 lambda + c0
  real c2, c1, c0;
  real operator()(real x) const { return ((x + c2) * x + c1) * x + c0; }
  real derivative(real x) const { return (3 * x + 2 * c2) * x + c1; }
};

inline Cubic characteristic_polynomial(const Eigen::Matrix3cd& h) {
  auto re = [&](int i, int j) { return static_cast<real>(h(i, j).real()); };
  auto abs2 = [&](int i, int j) {
    const std::complex<real> z(h(i, j).real(), h(i, j).imag());
    return std::norm(z);
  };
  const real a = re(0, 0), b = re(1, 1), c = re(2, 2);
  const std::complex<real> x(h(0, 1).real(), h(0, 1).imag());
  const std::complex<real> y(h(1, 2).real(), h(1, 2).imag());
  const std::complex<real> z(h(0, 2).real(), h(0, 2).imag());
  const real trace = a + b + c;
  const real minors = a * b + b * c + a * c - abs2(0, 1) - abs2(1, 2) - abs2(0, 2);
  const real det = a * b * c + 2 * (x * y * std::conj(z)).real() - a * abs2(1, 2) - b * abs2(0, 2) -
                   c * abs2(0, 1);
  return {-trace, minors, -det};
}

inline std::array<real, 3> roots(const Cubic& p) {
  const real shift = p.c2 / 3;
  const real pp = p.c1 - p.c2 * p.c2 / 3;
  const real qq = 2 * p.c2 * p.c2 * p.c2 / 27 - p.c2 * p.c1 / 3 + p.c0;
  std::array<real, 3> t{};
  if (pp >= 0) {
    t = {-shift, -shift, -shift};  // triple root
  } else {
    const real m = 2 * std::sqrt(-pp / 3);
    real arg = 3 * qq / (pp * m);
    arg = std::clamp(arg, static_cast<real>(-1), static_cast<real>(1));
    const real angle = std::acos(arg) / 3;
    for (int k = 0; k < 3; ++k)
      t[k] = m * std::cos(angle - 2 * std::numbers::pi_v<real> * k / 3) - shift;
  }
  for (auto& r : t) {
    for (int it = 0; it < 4; ++it) {
      const real d = p.derivative(r);
      if (std::fabs(d) < 1e-6L * (1 + std::fabs(r) * std::fabs(r))) break;
      const real step = p(r) / d;
      r -= step;
    }
  }
  std::sort(t.begin(), t.end());
  return t;
}

inline Eigen::Vector3d eigenvalues(const Eigen::Matrix3cd& h) {
  const auto r = roots(characteristic_polynomial(h));
  return {static_cast<double>(r[0]), static_cast<double>(r[1]), static_cast<double>(r[2])};
}

}  // namespace oracle
