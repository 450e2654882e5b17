#include "vbodmr/error.hpp"
#include "vbodmr/signal_synthesis.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace vbodmr;
using Catch::Matchers::WithinAbs;

namespace {

std::size_t argmin(const Trace& t, std::size_t lo, std::size_t hi) {
  std::size_t best = lo;
  for (std::size_t i = lo; i < hi; ++i)
    if (t[i].y < t[best].y) best = i;
  return best;
}

}  // namespace

TEST_CASE("zero contrast gives a flat baseline") {
  SpectrumModel m;
  m.resonances = {3440.0, 3540.0};
  m.contrast_minus = m.contrast_plus = 0.0;
  m.baseline = 0.97;
  const auto grid = linear_grid(3300.0, 3700.0, 5.0);
  for (const auto& s : synth_spectrum(m, grid)) REQUIRE(s.y == 0.97);
}

TEST_CASE("single dip reaches baseline minus contrast at its center") {
  SpectrumModel m;
  m.resonances = {3490.0, 3490.0};
  m.contrast_minus = 0.05;
  m.contrast_plus = 0.0;
  m.linewidth_minus = 100.0;
  const std::vector<double> grid{3440.0, 3490.0, 3540.0};
  const auto t = synth_spectrum(m, grid);
  CHECK_THAT(t[1].y, WithinAbs(0.95, 1e-15));
  CHECK_THAT(t[0].y, WithinAbs(1.0 - 0.025, 1e-15));  // half width from center
  CHECK_THAT(t[2].y, WithinAbs(1.0 - 0.025, 1e-15));
}

// Root of the derivative of the two-dip curve between lo and hi, by bisection.
double dip_minimum(const SpectrumModel& m, double lo, double hi) {
  auto slope = [&](double f) {
    auto d = [](double c, double w, double f0, double x) {
      const double g = w * w / 4;
      return 2 * c * g * (x - f0) / ((x - f0) * (x - f0) + g) / ((x - f0) * (x - f0) + g);
    };
    return d(m.contrast_minus, m.linewidth_minus, m.resonances.f_minus, f) +
           d(m.contrast_plus, m.linewidth_plus, m.resonances.f_plus, f);
  };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST_CASE("zero-field spectrum minima") {
  SpectrumModel m;
  m.resonances = transition_frequencies({}, FieldVector(0.0, 0.0));
  const auto grid = linear_grid(3300.0, 3700.0, 1.0);
  const std::size_t mid = 190;  // 3490 MHz

  // Default 120 MHz lines overlap, pulling each minimum about 9 MHz inward.
  const auto wide = synth_spectrum(m, grid);
  const double lo = dip_minimum(m, 3400.0, 3490.0), hi = dip_minimum(m, 3490.0, 3600.0);
  CHECK_THAT(lo, WithinAbs(3449.0, 1.0));
  CHECK_THAT(hi, WithinAbs(3531.0, 1.0));
  CHECK(std::abs(wide[argmin(wide, 0, mid)].x - lo) <= 1.0);
  CHECK(std::abs(wide[argmin(wide, mid, wide.size())].x - hi) <= 1.0);

  m.linewidth_minus = m.linewidth_plus = 10.0;
  const auto narrow = synth_spectrum(m, grid);
  CHECK(std::abs(narrow[argmin(narrow, 0, mid)].x - 3440.0) <= 1.0);
  CHECK(std::abs(narrow[argmin(narrow, mid, narrow.size())].x - 3540.0) <= 1.0);
}

TEST_CASE("two-dip spectrum is the sum of single dips") {
  SpectrumModel both;
  both.resonances = {3300.0, 3650.0};
  both.contrast_minus = 0.03;
  both.contrast_plus = 0.07;
  both.linewidth_minus = 80.0;
  both.linewidth_plus = 150.0;
  both.baseline = 1.2;
  SpectrumModel lo = both, hi = both;
  lo.contrast_plus = 0.0;
  hi.contrast_minus = 0.0;
  const auto grid = linear_grid(3000.0, 4000.0, 0.5);
  const auto a = synth_spectrum(both, grid), b = synth_spectrum(lo, grid), c = synth_spectrum(hi, grid);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(b[i].y + c[i].y - both.baseline - a[i].y) <= 1e-12);
}

TEST_CASE("spectrum input validation") {
  SpectrumModel m;
  m.resonances = {3440.0, 3540.0};
  const std::vector<double> empty;
  CHECK_THROWS_AS(synth_spectrum(m, empty), InvalidArgument);
  const std::vector<double> unsorted{1.0, 3.0, 2.0};
  CHECK_THROWS_AS(synth_spectrum(m, unsorted), InvalidArgument);
  const std::vector<double> repeated{1.0, 1.0};
  CHECK_THROWS_AS(synth_spectrum(m, repeated), InvalidArgument);
  const std::vector<double> ok{1.0, 2.0};
  SpectrumModel bad = m;
  bad.linewidth_plus = 0.0;
  CHECK_THROWS_AS(synth_spectrum(bad, ok), InvalidArgument);
  bad = m;
  bad.contrast_minus = 1.0;
  CHECK_THROWS_AS(synth_spectrum(bad, ok), InvalidArgument);
  bad = m;
  bad.baseline = 0.0;
  CHECK_THROWS_AS(synth_spectrum(bad, ok), InvalidArgument);
}

TEST_CASE("Rabi trace at zero delay") {
  const RabiModel m{0.7, 42.76, 20.0, 0.0, 0.5, 200.0, 0.1};
  const std::vector<double> grid{0.0};
  CHECK_THAT(synth_rabi(m, grid)[0].y, WithinAbs(0.7 + 0.5 + 0.1, 1e-15));
}

TEST_CASE("Rabi quarter period crosses zero") {
  const RabiModel m{1.0, 1e9, 10.0, 0.0, 0.0, 200.0, 0.0};
  const std::vector<double> grid{25.0};
  CHECK_THAT(synth_rabi(m, grid)[0].y, WithinAbs(0.0, 1e-9));
}

TEST_CASE("Rabi envelope decays by e within one coherence time") {
  const RabiModel m{1.0, 42.76, 20.0, 0.0, 0.5, 200.0, 0.1};
  const auto grid = linear_grid(0.0, 200.0, 2.0);
  const auto t = synth_rabi(m, grid);
  // Peaks of |signal - background| sampled every half period (25 ns).
  double crossing = -1.0;
  for (const auto& s : t) {
    const double osc = std::abs(s.y - (m.b * std::exp(-s.x / m.t_b) + m.c));
    if (std::fmod(s.x, 25.0) == 0.0 && osc < std::exp(-1.0)) {
      crossing = s.x;
      break;
    }
  }
  // First peak below 1/e must lie at or after T_a and within one half
  // period of it.
  CHECK(crossing >= 42.76 - 2.0);
  CHECK(crossing <= 42.76 + 25.0);
  // Direct envelope at the grid point nearest T_a.
  const double env = std::exp(-42.0 / 42.76);
  CHECK_THAT(env, WithinAbs(std::exp(-1.0), std::exp(-1.0) * 2.0 / 42.76));
}

TEST_CASE("Rabi with zero amplitude is the background exponential") {
  const RabiModel m{0.0, 42.76, 20.0, 1.3, 0.5, 200.0, 0.1};
  const auto grid = linear_grid(0.0, 300.0, 0.7);
  for (const auto& s : synth_rabi(m, grid)) REQUIRE(s.y == 0.5 * std::exp(-s.x / 200.0) + 0.1);
}

TEST_CASE("Rabi phase and frequency units") {
  const RabiModel m{1.0, 1e12, 20.0, std::acos(-1.0) / 2, 0.0, 1.0, 0.0};
  const std::vector<double> grid{0.0, 12.5};
  const auto t = synth_rabi(m, grid);
  CHECK_THAT(t[0].y, WithinAbs(0.0, 1e-12));
  CHECK_THAT(t[1].y, WithinAbs(-1.0, 1e-9));  // quarter period at 20 MHz is 12.5 ns
}

TEST_CASE("Rabi input validation") {
  const std::vector<double> negative{-1.0, 0.0};
  CHECK_THROWS_AS(synth_rabi(RabiModel{}, negative), InvalidArgument);
  const std::vector<double> decreasing{2.0, 1.0};
  CHECK_THROWS_AS(synth_rabi(RabiModel{}, decreasing), InvalidArgument);
  const std::vector<double> ok{0.0, 1.0};
  CHECK_THROWS_AS(synth_rabi(RabiModel{1.0, 0.0}, ok), InvalidArgument);
  CHECK_THROWS_AS(synth_rabi(RabiModel{1.0, 10.0, -1.0}, ok), InvalidArgument);
  const std::vector<double> empty;
  CHECK_THROWS_AS(synth_rabi(RabiModel{}, empty), InvalidArgument);
}

TEST_CASE("noise with zero sigma is the identity") {
  const Trace t = synth_rabi(RabiModel{}, linear_grid(0.0, 50.0, 1.0));
  CHECK(add_noise(t, 0.0, 1) == t);
  CHECK_THROWS_AS(add_noise(t, -1.0, 1), InvalidArgument);
}

TEST_CASE("noise is reproducible per seed") {
  const Trace t = synth_rabi(RabiModel{}, linear_grid(0.0, 50.0, 1.0));
  CHECK(add_noise(t, 0.1, 42) == add_noise(t, 0.1, 42));
  CHECK_FALSE(add_noise(t, 0.1, 42) == add_noise(t, 0.1, 43));
  const auto noisy = add_noise(t, 0.1, 42);
  for (std::size_t i = 0; i < t.size(); ++i) REQUIRE(noisy[i].x == t[i].x);
}

TEST_CASE("noise has the requested standard deviation") {
  Trace flat(10000);
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = {static_cast<double>(i), 0.0};
  const auto noisy = add_noise(flat, 0.01, 2024);
  double mean = 0.0;
  for (const auto& s : noisy) mean += s.y;
  mean /= static_cast<double>(noisy.size());
  double var = 0.0;
  for (const auto& s : noisy) var += (s.y - mean) * (s.y - mean);
  const double sd = std::sqrt(var / static_cast<double>(noisy.size() - 1));
  CHECK(std::abs(sd - 0.01) <= 0.05 * 0.01);
}

TEST_CASE("linear grid") {
  const auto g = linear_grid(0.0, 1.0, 0.1);
  CHECK(g.size() == 11);
  CHECK(g.back() == Catch::Approx(1.0));
  CHECK(linear_grid(5.0, 5.0, 1.0).size() == 1);
  CHECK_THROWS_AS(linear_grid(0.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(linear_grid(1.0, 0.0, 0.1), InvalidArgument);
}
