#include "vbodmr/inversion.hpp"

#include "vbodmr/least_squares.hpp"
#include "vbodmr/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

namespace vbodmr {

std::string_view to_string(FitStatus status) noexcept {
  switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iterations: return "max-iterations";
    case FitStatus::stalled: return "stalled";
    case FitStatus::at_bound: return "at-bound";
    case FitStatus::oscillation_free: return "oscillation-free";
    case FitStatus::insufficient_span: return "insufficient-span";
  }
  return "unknown";
}

const FitParameter& FitReport::parameter(std::string_view name) const {
  for (const auto& p : estimate)
    if (p.name == name) return p;
  throw InvalidArgument("fit report has no parameter '" + std::string(name) + "'");
}

void validate(const ResonanceDataset& data) {
  validate(data.params);
  if (data.rows.size() < 2)
    throw InvalidArgument("resonance dataset needs at least 2 rows, got " +
                          std::to_string(data.rows.size()));
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& row = data.rows[i];
    const std::string where = "row " + std::to_string(i + 1) + ": ";
    if (!std::isfinite(row.b_magnitude) || !std::isfinite(row.f_minus) || !std::isfinite(row.f_plus))
      throw InvalidArgument(where + "non-finite value");
    if (row.b_magnitude < 0.0) throw InvalidArgument(where + "negative field magnitude");
    if (row.f_minus > row.f_plus) throw InvalidArgument(where + "f_minus exceeds f_plus");
  }
}

namespace {

FitStatus status_from(const LeastSquaresResult& r) {
  if (r.converged) return FitStatus::converged;
  switch (r.stop) {
    case LeastSquaresStop::max_iterations: return FitStatus::max_iterations;
    default: return FitStatus::stalled;
  }
}

// ---------------------------------------------------------------------------
// Angle fit
// ---------------------------------------------------------------------------

// Parameter layout of the angle fit.
enum AngleParam : Eigen::Index { kTheta = 0, kDzfs = 1, kGamma = 2, kAngleParamCount = 3 };

double expectation(const Eigen::Vector3cd& v, const Matrix3c& op) {
  return (v.adjoint() * op * v)(0, 0).real();
}

// Model pair and its derivatives with respect to (theta_deg, D, gamma_e),
// the latter by Hellmann-Feynman on the non-degenerate eigenpairs.
struct PairWithJacobian {
  ResonancePair pair;
  Eigen::Matrix<double, 2, 3> jac;
};

PairWithJacobian evaluate_pair(const SpinParams& params, const FieldVector& field) {
  const EigenSystem sys = eigensolve(build_hamiltonian(params, field));
  const std::array<Matrix3c, 3> dh{hamiltonian_d_theta_deg(params, field), hamiltonian_d_zfs(params),
                                   hamiltonian_d_gamma(field)};
  Eigen::Matrix3d dlambda;  // (state, parameter)
  for (int k = 0; k < 3; ++k)
    for (int p = 0; p < 3; ++p) dlambda(k, p) = expectation(sys.eigenvectors.col(k), dh[static_cast<std::size_t>(p)]);

  // Each transition is lambda_hi - lambda_lo for a pair of states.
  std::array<std::pair<int, int>, 2> transitions;
  try {
    const int bright = static_cast<int>(bright_state(sys));
    int n = 0;
    for (int k = 0; k < 3; ++k) {
      if (k == bright) continue;
      transitions[static_cast<std::size_t>(n++)] =
          sys.eigenvalues(k) >= sys.eigenvalues(bright) ? std::pair{k, bright} : std::pair{bright, k};
    }
  } catch (const AmbiguousLabeling&) {
    transitions = {std::pair{1, 0}, std::pair{2, 1}};
  }
  std::array<double, 2> f{};
  for (std::size_t i = 0; i < 2; ++i)
    f[i] = sys.eigenvalues(transitions[i].first) - sys.eigenvalues(transitions[i].second);
  if (f[0] > f[1]) {
    std::swap(f[0], f[1]);
    std::swap(transitions[0], transitions[1]);
  }

  PairWithJacobian out;
  out.pair = {f[0], f[1]};
  for (std::size_t i = 0; i < 2; ++i)
    out.jac.row(static_cast<Eigen::Index>(i)) =
        dlambda.row(transitions[i].first) - dlambda.row(transitions[i].second);
  return out;
}

SpinParams params_at(const SpinParams& base, const Eigen::VectorXd& x) {
  SpinParams p = base;
  p.d_zfs = x(kDzfs);
  p.gamma_e = x(kGamma);
  return p;
}

}  // namespace

double angle_objective(const ResonanceDataset& data, double theta_deg, double phi_deg) {
  double sum = 0.0;
  for (const auto& row : data.rows) {
    const ResonancePair model =
        transition_frequencies_or_gaps(data.params, FieldVector(row.b_magnitude, theta_deg, phi_deg));
    const double dm = model.f_minus - row.f_minus;
    const double dp = model.f_plus - row.f_plus;
    sum += dm * dm + dp * dp;
  }
  return sum;
}

FitReport fit_angle(const ResonanceDataset& data, const AngleFitOptions& options) {
  validate(data);
  if (std::none_of(data.rows.begin(), data.rows.end(),
                   [](const ResonanceRow& r) { return r.b_magnitude > 0.0; }))
    throw ComputationError("angle is unidentifiable: every row has zero field");
  if (!(options.grid_step_deg > 0.0)) throw InvalidArgument("grid step must be positive");

  // Global stage: the theta objective is multi-modal under noise.
  double best_theta = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  for (const double theta : linear_grid(0.0, 90.0, options.grid_step_deg)) {
    const double value = angle_objective(data, theta, options.phi_deg);
    if (value < best_value) {
      best_value = value;
      best_theta = theta;
    }
  }

  const auto m = static_cast<Eigen::Index>(2 * data.rows.size());
  LeastSquaresProblem problem;
  problem.residual_count = m;
  problem.fixed = {false, !options.fit_d_zfs, !options.fit_gamma_e};
  problem.lower = Eigen::Vector3d(0.0, 1.0, 1e-3);
  problem.upper = Eigen::Vector3d(90.0, 1e5, 100.0);
  const double phi = options.phi_deg;
  problem.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const SpinParams p = params_at(data.params, x);
    for (std::size_t k = 0; k < data.rows.size(); ++k) {
      const auto& row = data.rows[k];
      const ResonancePair model = transition_frequencies_or_gaps(p, FieldVector(row.b_magnitude, x(kTheta), phi));
      r(static_cast<Eigen::Index>(2 * k)) = model.f_minus - row.f_minus;
      r(static_cast<Eigen::Index>(2 * k + 1)) = model.f_plus - row.f_plus;
    }
  };
  problem.jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& jac) {
    const SpinParams p = params_at(data.params, x);
    for (std::size_t k = 0; k < data.rows.size(); ++k) {
      const auto eval = evaluate_pair(p, FieldVector(data.rows[k].b_magnitude, x(kTheta), phi));
      jac.middleRows(static_cast<Eigen::Index>(2 * k), 2) = eval.jac;
    }
  };

  double data_scale = 0.0;
  for (const auto& row : data.rows) data_scale = std::max(data_scale, std::abs(row.f_plus));
  LeastSquaresOptions lm;
  lm.max_iterations = options.max_iterations;
  lm.residual_floor = 1e-10 * std::sqrt(static_cast<double>(m)) * std::max(data_scale, 1.0);

  const Eigen::Vector3d x0(best_theta, data.params.d_zfs, data.params.gamma_e);
  Eigen::VectorXd r0(m);
  problem.residuals(x0, r0);
  const double model_roundoff = 64.0 * std::numeric_limits<double>::epsilon() * data_scale;
  lm.cost_noise = r0.norm() * std::sqrt(static_cast<double>(m)) * model_roundoff;
  const LeastSquaresResult fit = levenberg_marquardt(problem, x0, lm);
  const Eigen::VectorXd variance = parameter_variances(fit.jacobian, fit.residuals, problem.fixed);

  FitReport report;
  report.estimate = {
      {"theta_deg", "deg", fit.x(kTheta), variance(kTheta), false},
      {"d_zfs_mhz", "MHz", fit.x(kDzfs), variance(kDzfs), !options.fit_d_zfs},
      {"gamma_e_mhz_per_g", "MHz/G", fit.x(kGamma), variance(kGamma), !options.fit_gamma_e},
  };
  report.residual_rms = std::sqrt(fit.residuals.squaredNorm() / static_cast<double>(m));
  report.iterations = fit.iterations;
  report.status = status_from(fit);
  report.converged = report.status == FitStatus::converged;
  report.gradient_measure = fit.gradient_measure;
  return report;
}

// ---------------------------------------------------------------------------
// Rabi fit
// ---------------------------------------------------------------------------

namespace {

enum RabiParam : Eigen::Index { kA = 0, kTa, kF, kPhi, kB, kTb, kC, kRabiParamCount };

struct TraceView {
  Eigen::VectorXd tau;
  Eigen::VectorXd y;
};

TraceView view_of(const Trace& trace) {
  TraceView v{Eigen::VectorXd(static_cast<Eigen::Index>(trace.size())),
              Eigen::VectorXd(static_cast<Eigen::Index>(trace.size()))};
  for (std::size_t i = 0; i < trace.size(); ++i) {
    v.tau(static_cast<Eigen::Index>(i)) = trace[i].x;
    v.y(static_cast<Eigen::Index>(i)) = trace[i].y;
  }
  return v;
}

void check_rabi_trace(const Trace& trace) {
  if (trace.size() < 16)
    throw InvalidArgument("Rabi fit needs at least 16 samples, got " + std::to_string(trace.size()));
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!std::isfinite(trace[i].x) || !std::isfinite(trace[i].y))
      throw InvalidArgument("Rabi trace has a non-finite value at sample " + std::to_string(i + 1));
    if (trace[i].x < 0.0)
      throw InvalidArgument("Rabi trace has a negative delay at sample " + std::to_string(i + 1));
    if (i > 0 && !(trace[i].x > trace[i - 1].x))
      throw InvalidArgument("Rabi trace delays are not increasing at sample " + std::to_string(i + 1));
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

double nyquist_mhz(const TraceView& v) {
  std::vector<double> dt;
  for (Eigen::Index i = 1; i < v.tau.size(); ++i) dt.push_back(v.tau(i) - v.tau(i - 1));
  return 0.5 / median(dt) * 1e3;
}

// Quadratic trend in u = (tau - tau0) / span: coefficients (p0, p1, p2).
Eigen::Vector3d quadratic_trend(const TraceView& v, double tau0, double span) {
  Eigen::MatrixXd basis(v.tau.size(), 3);
  for (Eigen::Index i = 0; i < v.tau.size(); ++i) {
    const double u = (v.tau(i) - tau0) / span;
    basis(i, 0) = 1.0;
    basis(i, 1) = u;
    basis(i, 2) = u * u;
  }
  return basis.colPivHouseholderQr().solve(v.y);
}

// Linear coefficients (A, B, b, c) of
//   A e^{-t/ta} cos(w t) + B e^{-t/ta} sin(w t) + b e^{-t/tb} + c
// for fixed (ta, w, tb); returns the residual sum of squares.
double solve_linear_part(const TraceView& v, double ta, double w, double tb, bool oscillating,
                         Eigen::Vector4d& coef) {
  const Eigen::Index n = v.tau.size();
  const Eigen::Index cols = oscillating ? 4 : 2;
  Eigen::MatrixXd basis(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = v.tau(i);
    Eigen::Index c = 0;
    if (oscillating) {
      const double env = std::exp(-t / ta);
      basis(i, c++) = env * std::cos(w * t);
      basis(i, c++) = env * std::sin(w * t);
    }
    basis(i, c++) = std::exp(-t / tb);
    basis(i, c++) = 1.0;
  }
  const Eigen::VectorXd sol = basis.completeOrthogonalDecomposition().solve(v.y);
  coef.setZero();
  if (oscillating) {
    coef = sol;
  } else {
    coef(2) = sol(0);
    coef(3) = sol(1);
  }
  return (basis * sol - v.y).squaredNorm();
}

RabiModel model_from_linear(double ta, double f, double tb, const Eigen::Vector4d& coef) {
  RabiModel m;
  m.t_a = ta;
  m.f = f;
  m.t_b = tb;
  // A cos(wt) + B sin(wt) = a cos(wt + phi) with A = a cos(phi), B = -a sin(phi).
  m.a = std::hypot(coef(0), coef(1));
  m.phi = m.a > 0.0 ? std::atan2(-coef(1), coef(0)) : 0.0;
  m.b = coef(2);
  m.c = coef(3);
  return m;
}

double wrap_phase(double phi) {
  double w = std::remainder(phi, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

// Trend-only seed (b, t_b, c) from a quadratic fit; c from the trace mean.
void seed_trend(const TraceView& v, double tau0, double span, RabiModel& m) {
  const Eigen::Vector3d p = quadratic_trend(v, tau0, span);
  const double p1 = p(1) / span;              // per ns
  const double p2 = p(2) / (span * span);     // per ns^2
  m.c = v.y.mean();
  if (p1 * p2 < 0.0) {
    m.t_b = -p1 / (2.0 * p2);
    m.b = -p1 * m.t_b * std::exp(tau0 / m.t_b);
  } else {
    m.t_b = span;
    m.b = (p(0) - m.c) * std::exp(tau0 / m.t_b);
  }
  if (!std::isfinite(m.b)) m.b = 0.0;
}

}  // namespace

std::optional<RabiModel> initial_rabi_guess(const Trace& trace, const RabiFitOptions& options) {
  check_rabi_trace(trace);
  const TraceView v = view_of(trace);
  const Eigen::Index n = v.tau.size();
  const double tau0 = v.tau(0);
  const double span = v.tau(n - 1) - tau0;
  const double nyq = nyquist_mhz(v);

  RabiModel guess;
  seed_trend(v, tau0, span, guess);

  const Eigen::Vector3d trend = quadratic_trend(v, tau0, span);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (v.tau(i) - tau0) / span;
    z(i) = v.y(i) - (trend(0) + trend(1) * u + trend(2) * u * u);
  }

  // Detection and frequency come from what a background-only fit leaves
  // behind, so a pure decay shows no spectral peak.
  RabiFitOptions background_options = options;
  background_options.no_oscillation = true;
  const RabiModel background = fit_rabi(trace, background_options).model;
  Eigen::VectorXd rest(n);
  for (Eigen::Index i = 0; i < n; ++i) rest(i) = v.y(i) - background(v.tau(i));

  // Oversampled direct DFT (works on uneven grids).
  const double nu_min = 1.0 / span;        // cycles per ns
  const double nu_max = nyq * 1e-3;
  const double dnu = 0.25 / span;
  std::vector<double> nus, amps;
  for (double nu = nu_min; nu <= nu_max + 1e-12 * nu_max; nu += dnu) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      acc += rest(i) * std::polar(1.0, -2.0 * std::numbers::pi * nu * (v.tau(i) - tau0));
    nus.push_back(nu);
    amps.push_back(2.0 * std::abs(acc) / static_cast<double>(n));
  }
  if (amps.empty()) return std::nullopt;
  const auto peak_it = std::max_element(amps.begin(), amps.end());
  const auto peak = static_cast<std::size_t>(peak_it - amps.begin());
  const double floor = median(amps);
  const double scale = v.y.cwiseAbs().maxCoeff();
  if (!(*peak_it > options.detection_ratio * floor) || !(*peak_it > 1e-9 * scale)) return std::nullopt;

  double nu = nus[peak];
  if (peak > 0 && peak + 1 < amps.size()) {
    const double l = amps[peak - 1], c = amps[peak], r = amps[peak + 1];
    const double denom = l - 2.0 * c + r;
    if (denom < 0.0) nu += 0.5 * dnu * (l - r) / denom;
  }
  guess.f = std::clamp(nu * 1e3, 0.0, nyq);

  guess.a = 0.5 * (z.maxCoeff() - z.minCoeff());

  // Log-envelope slope: per-period maxima of |z|, weighted by amplitude^2.
  const double period = 1.0 / nu;
  double sw = 0, st = 0, sl = 0, stt = 0, stl = 0;
  int chunks = 0;
  for (double start = tau0; start < v.tau(n - 1); start += period) {
    double best = 0.0, best_t = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v.tau(i) < start || v.tau(i) >= start + period) continue;
      ++count;
      if (std::abs(z(i)) > best) {
        best = std::abs(z(i));
        best_t = v.tau(i);
      }
    }
    if (count < 2 || best <= 0.0) continue;
    const double w = best * best;
    const double l = std::log(best);
    sw += w;
    st += w * best_t;
    sl += w * l;
    stt += w * best_t * best_t;
    stl += w * best_t * l;
    ++chunks;
  }
  guess.t_a = 10.0 * span;
  if (chunks >= 2) {
    const double slope = (sw * stl - st * sl) / (sw * stt - st * st);
    if (slope < 0.0 && std::isfinite(slope)) guess.t_a = -1.0 / slope;
  }
  guess.t_a = std::clamp(guess.t_a, options.min_decay_ns, options.max_decay_ns);
  guess.t_b = std::clamp(guess.t_b, options.min_decay_ns, options.max_decay_ns);

  // Phase from the first sample, sign from the initial slope.
  const double w = rabi_angular_frequency(guess.f);
  const double env0 = guess.a * std::exp(-tau0 / guess.t_a);
  const double cos_arg = env0 > 0.0 ? std::clamp(z(0) / env0, -1.0, 1.0) : 1.0;
  double arg0 = std::acos(cos_arg);
  if (z(1) > z(0)) arg0 = -arg0;
  guess.phi = wrap_phase(arg0 - w * tau0);
  guess.a *= std::exp(tau0 / guess.t_a);
  return guess;
}

RabiFit fit_rabi(const Trace& trace, const RabiFitOptions& options) {
  check_rabi_trace(trace);
  const TraceView v = view_of(trace);
  const Eigen::Index n = v.tau.size();
  const double tau0 = v.tau(0);
  const double span = v.tau(n - 1) - tau0;
  const double nyq = nyquist_mhz(v);
  const bool oscillating = !options.no_oscillation;

  RabiModel seed;
  if (oscillating) {
    const auto guess = initial_rabi_guess(trace, options);
    if (!guess) {
      RabiFitOptions trend_only = options;
      trend_only.no_oscillation = true;
      RabiFit fit = fit_rabi(trace, trend_only);
      fit.report.status = FitStatus::oscillation_free;
      fit.report.converged = false;
      return fit;
    }
    seed = *guess;
  } else {
    seed_trend(v, tau0, span, seed);
    seed.a = 0.0;
    seed.f = 0.0;
    seed.phi = 0.0;
    seed.t_a = 1.0;
    seed.t_b = std::clamp(seed.t_b, options.min_decay_ns, options.max_decay_ns);
  }

  // Polish the seed: scan the nonlinear parameters around it, solving for
  // the linear ones exactly.
  {
    const std::array<double, 5> ta_factors{0.5, 0.7, 1.0, 1.4, 2.0};
    const std::array<double, 7> tb_factors{0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0};
    const double df = 0.25 / span * 1e3;
    const std::array<double, 3> f_offsets{-df, 0.0, df};
    double best = std::numeric_limits<double>::infinity();
    RabiModel best_model = seed;
    for (const double fa : oscillating ? std::vector<double>(ta_factors.begin(), ta_factors.end())
                                       : std::vector<double>{1.0}) {
      for (const double fo : oscillating ? std::vector<double>(f_offsets.begin(), f_offsets.end())
                                         : std::vector<double>{0.0}) {
        for (const double fb : tb_factors) {
          const double ta = std::clamp(seed.t_a * fa, options.min_decay_ns, options.max_decay_ns);
          const double f = std::clamp(seed.f + fo, 0.0, nyq);
          const double tb = std::clamp(seed.t_b * fb, options.min_decay_ns, options.max_decay_ns);
          Eigen::Vector4d coef;
          const double ssr = solve_linear_part(v, ta, rabi_angular_frequency(f), tb, oscillating, coef);
          if (ssr < best) {
            best = ssr;
            best_model = model_from_linear(ta, f, tb, coef);
          }
        }
      }
    }
    if (!oscillating) {
      best_model.a = 0.0;
      best_model.f = 0.0;
      best_model.phi = 0.0;
      best_model.t_a = 1.0;
    }
    seed = best_model;
  }

  LeastSquaresProblem problem;
  problem.residual_count = n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  problem.lower.resize(kRabiParamCount);
  problem.upper.resize(kRabiParamCount);
  problem.lower << -inf, options.min_decay_ns, 0.0, -inf, -inf, options.min_decay_ns, -inf;
  problem.upper << inf, options.max_decay_ns, nyq, inf, inf, options.max_decay_ns, inf;
  if (!oscillating) problem.fixed = {true, true, true, true, false, false, false};

  const auto to_model = [](const Eigen::VectorXd& x) {
    RabiModel m;
    m.a = x(kA);
    m.t_a = x(kTa);
    m.f = x(kF);
    m.phi = x(kPhi);
    m.b = x(kB);
    m.t_b = x(kTb);
    m.c = x(kC);
    return m;
  };
  problem.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const RabiModel m = to_model(x);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = m(v.tau(i)) - v.y(i);
  };
  problem.jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& jac) {
    const double w = rabi_angular_frequency(x(kF));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = v.tau(i);
      const double ea = std::exp(-t / x(kTa));
      const double eb = std::exp(-t / x(kTb));
      const double cs = std::cos(w * t + x(kPhi));
      const double sn = std::sin(w * t + x(kPhi));
      jac(i, kA) = ea * cs;
      jac(i, kTa) = x(kA) * ea * cs * t / (x(kTa) * x(kTa));
      jac(i, kF) = -x(kA) * ea * sn * rabi_angular_frequency(1.0) * t;
      jac(i, kPhi) = -x(kA) * ea * sn;
      jac(i, kB) = eb;
      jac(i, kTb) = x(kB) * eb * t / (x(kTb) * x(kTb));
      jac(i, kC) = 1.0;
    }
  };

  Eigen::VectorXd x0(kRabiParamCount);
  x0 << seed.a, seed.t_a, seed.f, seed.phi, seed.b, seed.t_b, seed.c;
  LeastSquaresOptions lm;
  lm.max_iterations = options.max_iterations;
  lm.gradient_tolerance = options.gradient_tolerance;
  lm.residual_floor = 1e-9 * std::sqrt(static_cast<double>(n)) * std::max(v.y.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd r0(n);
  problem.residuals(x0, r0);
  lm.cost_noise = r0.norm() * std::sqrt(static_cast<double>(n)) * 64.0 *
                  std::numeric_limits<double>::epsilon() * v.y.cwiseAbs().maxCoeff();
  const LeastSquaresResult fit = levenberg_marquardt(problem, x0, lm);
  const Eigen::VectorXd variance = parameter_variances(fit.jacobian, fit.residuals, problem.fixed);

  RabiFit out;
  out.model = to_model(fit.x);
  if (out.model.a < 0.0) {
    out.model.a = -out.model.a;
    out.model.phi += std::numbers::pi;
  }
  out.model.phi = wrap_phase(out.model.phi);

  const double rad2deg2 = units::rad_to_deg(1.0) * units::rad_to_deg(1.0);
  const bool fixed_osc = !oscillating;
  out.report.estimate = {
      {"a", "", out.model.a, variance(kA), fixed_osc},
      {"t_a_ns", "ns", out.model.t_a, variance(kTa), fixed_osc},
      {"f_mhz", "MHz", out.model.f, variance(kF), fixed_osc},
      {"phi_deg", "deg", units::rad_to_deg(out.model.phi), variance(kPhi) * rad2deg2, fixed_osc},
      {"b", "", out.model.b, variance(kB), false},
      {"t_b_ns", "ns", out.model.t_b, variance(kTb), false},
      {"c", "", out.model.c, variance(kC), false},
  };
  out.report.residual_rms = std::sqrt(fit.residuals.squaredNorm() / static_cast<double>(n));
  out.report.iterations = fit.iterations;
  out.report.gradient_measure = fit.gradient_measure;
  out.report.status = status_from(fit);
  const bool decay_at_bound = (oscillating && fit.at_bound[kTa]) || fit.at_bound[kTb];
  if (decay_at_bound) out.report.status = FitStatus::at_bound;
  if (oscillating && out.report.status != FitStatus::at_bound && out.model.f > 0.0 &&
      1e3 / out.model.f > span)
    out.report.status = FitStatus::insufficient_span;
  out.report.converged = out.report.status == FitStatus::converged;
  return out;
}

std::vector<CoherenceRow> coherence_vs_angle(const std::vector<AngleTrace>& traces,
                                             const RabiFitOptions& options) {
  std::vector<CoherenceRow> rows;
  rows.reserve(traces.size());
  for (const auto& entry : traces) {
    CoherenceRow row;
    row.theta_deg = entry.theta_deg;
    try {
      const RabiFit fit = fit_rabi(entry.trace, options);
      row.t_a = fit.model.t_a;
      row.uncertainty = std::sqrt(fit.report.parameter("t_a_ns").variance);
      row.status = fit.report.status;
      row.ok = fit.report.converged;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vbodmr
