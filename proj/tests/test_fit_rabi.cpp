#include "synthetic.hpp"

#include "vbodmr/error.hpp"
#include "vbodmr/inversion.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

using namespace vbodmr;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Background {
  double b, t_b, c, cost;
};

// Exact minimizer of sum (b exp(-tau/t_b) + c - y)^2: for fixed t_b the
// problem is linear in (b, c); t_b is found by golden-section search on a
// log scale.
Background background_oracle(const Trace& trace, double lo, double hi) {
  auto solve = [&](double t_b) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(trace.size()), 2);
    Eigen::VectorXd y(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const auto& s = trace[static_cast<std::size_t>(i)];
      a(i, 0) = std::exp(-s.x / t_b);
      a(i, 1) = 1.0;
      y(i) = s.y;
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
    return Background{coef(0), t_b, coef(1), (a * coef - y).squaredNorm()};
  };
  double a = std::log(lo), b = std::log(hi);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (solve(std::exp(c)).cost < solve(std::exp(d)).cost)
      b = d;
    else
      a = c;
    c = b - invphi * (b - a);
    d = a + invphi * (b - a);
  }
  return solve(std::exp(0.5 * (a + b)));
}

Trace grid_trace(const RabiModel& m, double stop = 200.0, double step = 1.0) {
  return synth_rabi(m, linear_grid(0.0, stop, step));
}

}  // namespace

TEST_CASE("noiseless reference trace recovers every parameter") {
  const RabiModel truth = synthetic::reference_rabi();
  const auto fit = fit_rabi(grid_trace(truth));
  REQUIRE(fit.report.converged);
  CHECK(fit.report.status == FitStatus::converged);
  CHECK_THAT(fit.model.a, WithinRel(truth.a, 0.005));
  CHECK_THAT(fit.model.t_a, WithinRel(truth.t_a, 0.005));
  CHECK_THAT(fit.model.f, WithinRel(truth.f, 0.005));
  CHECK_THAT(fit.model.phi, WithinAbs(truth.phi, 0.005));
  CHECK_THAT(fit.model.b, WithinRel(truth.b, 0.005));
  CHECK_THAT(fit.model.t_b, WithinRel(truth.t_b, 0.005));
  CHECK_THAT(fit.model.c, WithinRel(truth.c, 0.005));
  CHECK_THAT(fit.report.value("t_a_ns"), WithinRel(42.76, 0.005));
  CHECK(fit.report.residual_rms < 1e-8);
}

TEST_CASE("report names and units") {
  const auto fit = fit_rabi(grid_trace(synthetic::reference_rabi()));
  CHECK(fit.report.parameter("f_mhz").unit == "MHz");
  CHECK(fit.report.parameter("phi_deg").unit == "deg");
  CHECK(fit.report.parameter("t_b_ns").unit == "ns");
  CHECK_THROWS_AS(fit.report.parameter("nope"), InvalidArgument);
}

TEST_CASE("phase and sign conventions") {
  RabiModel truth = synthetic::reference_rabi();
  truth.phi = 2.0;
  truth.a = 0.8;
  truth.f = 12.0;
  const auto fit = fit_rabi(grid_trace(truth, 300.0));
  REQUIRE(fit.report.converged);
  CHECK(fit.model.a > 0.0);
  CHECK_THAT(fit.model.phi, WithinAbs(2.0, 1e-4));
  CHECK_THAT(fit.report.value("phi_deg"), WithinAbs(2.0 * 180.0 / std::acos(-1.0), 1e-2));
  CHECK_THAT(fit.model.f, WithinRel(12.0, 1e-6));
}

TEST_CASE("constant trace is oscillation free") {
  Trace flat;
  for (int i = 0; i <= 100; ++i) flat.push_back({static_cast<double>(i), 0.3});
  const auto fit = fit_rabi(flat);
  CHECK_FALSE(fit.report.converged);
  CHECK(fit.report.status == FitStatus::oscillation_free);
  CHECK_THAT(fit.model.c + fit.model.b * std::exp(-50.0 / fit.model.t_b), WithinAbs(0.3, 1e-9));
  CHECK_FALSE(initial_rabi_guess(flat).has_value());
}

TEST_CASE("pure decay without oscillation is oscillation free") {
  const Trace decay = grid_trace({0.0, 10.0, 20.0, 0.0, 0.5, 60.0, 0.1});
  const auto fit = fit_rabi(decay);
  CHECK(fit.report.status == FitStatus::oscillation_free);
  CHECK_FALSE(fit.report.converged);
  CHECK_THAT(fit.model.t_b, WithinRel(60.0, 1e-6));
}

TEST_CASE("noisy reference trace") {
  const RabiModel truth = synthetic::reference_rabi();
  const auto trace = add_noise(grid_trace(truth), 0.02 * truth.a, 2024);
  const auto fit = fit_rabi(trace);
  CHECK(fit.report.converged);
  CHECK_THAT(fit.model.t_a, WithinRel(42.76, 0.10));
  const double se = std::sqrt(fit.report.parameter("t_a_ns").variance);
  CHECK(se > 0.0);
  CHECK(se < 5.0);
  CHECK_THAT(fit.report.residual_rms, WithinRel(0.02, 0.2));
}

TEST_CASE("initial guess lands near the truth") {
  const RabiModel truth = synthetic::reference_rabi();
  const auto guess = initial_rabi_guess(grid_trace(truth));
  REQUIRE(guess.has_value());
  CHECK_THAT(guess->f, WithinRel(20.0, 0.05));
  CHECK(guess->t_a > 10.0);
  CHECK(guess->t_a < 200.0);
}

TEST_CASE("zero amplitude fit matches the background oracle") {
  const RabiModel bg{0.0, 42.76, 20.0, 0.0, 0.7, 80.0, 0.2};
  const auto trace = add_noise(grid_trace(bg), 0.01, 31);
  RabiFitOptions opts;
  opts.no_oscillation = true;
  const auto fit = fit_rabi(trace, opts);
  const auto ref = background_oracle(trace, 0.1, 1e6);
  CHECK(fit.model.a == 0.0);
  CHECK(fit.report.parameter("a").fixed);
  CHECK_THAT(fit.model.b, WithinRel(ref.b, 1e-6));
  CHECK_THAT(fit.model.t_b, WithinRel(ref.t_b, 1e-6));
  CHECK_THAT(fit.model.c, WithinRel(ref.c, 1e-6));
  CHECK(fit.report.converged);
}

TEST_CASE("input validation") {
  Trace short_trace;
  for (int i = 0; i < 15; ++i) short_trace.push_back({static_cast<double>(i), 0.0});
  CHECK_THROWS_AS(fit_rabi(short_trace), InvalidArgument);
  Trace unsorted = grid_trace(synthetic::reference_rabi());
  std::swap(unsorted[3], unsorted[4]);
  CHECK_THROWS_AS(fit_rabi(unsorted), InvalidArgument);
  Trace negative = grid_trace(synthetic::reference_rabi());
  negative[0].x = -1.0;
  CHECK_THROWS_AS(fit_rabi(negative), InvalidArgument);
}

TEST_CASE("slow oscillation on a short span is flagged") {
  // One tenth of a period fits in the window.
  const RabiModel slow{1.0, 1e4, 0.5, 0.0, 0.0, 200.0, 0.0};
  const auto fit = fit_rabi(grid_trace(slow, 200.0));
  CHECK_FALSE(fit.report.converged);
  CHECK((fit.report.status == FitStatus::insufficient_span || fit.report.status == FitStatus::oscillation_free));
}

TEST_CASE("fits are deterministic") {
  const auto trace = add_noise(grid_trace(synthetic::reference_rabi()), 0.02, 5);
  const auto a = fit_rabi(trace), b = fit_rabi(trace);
  for (std::size_t i = 0; i < a.report.estimate.size(); ++i) {
    CHECK(a.report.estimate[i].value == b.report.estimate[i].value);
    CHECK(a.report.estimate[i].variance == b.report.estimate[i].variance);
  }
}

TEST_CASE("coherence batch on a single trace") {
  const auto rows = coherence_vs_angle({{0.0, grid_trace(synthetic::reference_rabi())}});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].theta_deg == 0.0);
  CHECK(rows[0].ok);
  CHECK_THAT(rows[0].t_a, WithinRel(42.76, 0.005));
}

TEST_CASE("coherence batch on empty input") { CHECK(coherence_vs_angle({}).empty()); }

TEST_CASE("coherence follows a decreasing ground truth in input order") {
  std::vector<AngleTrace> traces;
  const std::vector<double> thetas{0.0, 30.0, 60.0, 90.0};
  const std::vector<double> times{42.76, 35.0, 28.0, 20.0};
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    RabiModel m = synthetic::reference_rabi();
    m.t_a = times[i];
    traces.push_back({thetas[i], add_noise(grid_trace(m), 0.005, 100 + i)});
  }
  const auto rows = coherence_vs_angle(traces);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].theta_deg == thetas[i]);
    CHECK(rows[i].ok);
    CHECK(rows[i].uncertainty > 0.0);
  }
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].t_a < rows[i - 1].t_a);
}

TEST_CASE("coherence batch records failures without aborting") {
  Trace bad;
  for (int i = 0; i < 5; ++i) bad.push_back({static_cast<double>(i), 1.0});
  const auto rows = coherence_vs_angle({{10.0, bad}, {20.0, grid_trace(synthetic::reference_rabi())}});
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].ok);
  CHECK_FALSE(rows[0].error.empty());
  CHECK(rows[1].ok);
}
