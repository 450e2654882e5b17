#include "vbodmr/least_squares.hpp"

#include "vbodmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vbodmr {

std::string_view to_string(LeastSquaresStop stop) noexcept {
  switch (stop) {
    case LeastSquaresStop::gradient: return "gradient";
    case LeastSquaresStop::exact_fit: return "exact-fit";
    case LeastSquaresStop::small_step: return "small-step";
    case LeastSquaresStop::max_iterations: return "max-iterations";
    case LeastSquaresStop::stalled: return "stalled";
  }
  return "unknown";
}

namespace {

struct Evaluator {
  const LeastSquaresProblem& problem;
  Eigen::Index n;

  void residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    r.resize(problem.residual_count);
    problem.residuals(x, r);
  }

  void jacobian(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    jac.resize(problem.residual_count, n);
    if (problem.jacobian) {
      problem.jacobian(x, jac);
      return;
    }
    Eigen::VectorXd up(problem.residual_count), down(problem.residual_count);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      residuals(xp, up);
      residuals(xm, down);
      jac.col(j) = (up - down) / (2.0 * h);
    }
  }
};

}  // namespace

LeastSquaresResult levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd x,
                                       const LeastSquaresOptions& options) {
  const Eigen::Index n = x.size();
  if (!problem.residuals) throw InvalidArgument("least squares: no residual function");
  if (problem.residual_count <= 0) throw InvalidArgument("least squares: no residuals");
  const bool bounded = problem.lower.size() == n && problem.upper.size() == n;
  if ((problem.lower.size() != 0 || problem.upper.size() != 0) && !bounded)
    throw InvalidArgument("least squares: bound vectors have the wrong size");
  if (!problem.fixed.empty() && static_cast<Eigen::Index>(problem.fixed.size()) != n)
    throw InvalidArgument("least squares: fixed mask has the wrong size");

  const auto is_fixed = [&](Eigen::Index j) {
    return !problem.fixed.empty() && problem.fixed[static_cast<std::size_t>(j)];
  };
  const auto clamp = [&](Eigen::VectorXd& v) {
    if (!bounded) return;
    v = v.cwiseMax(problem.lower).cwiseMin(problem.upper);
  };

  const Evaluator eval{problem, n};
  clamp(x);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  eval.residuals(x, r);
  if (!r.allFinite()) throw ComputationError("least squares: residuals not finite at start");
  eval.jacobian(x, jac);
  double cost = 0.5 * r.squaredNorm();
  // Residuals at roundoff level of the starting point count as an exact fit.
  const double floor_norm =
      std::max(options.residual_floor, 1e3 * std::numeric_limits<double>::epsilon() * r.norm());

  // Components pinned at a bound with the descent direction pointing out.
  std::vector<bool> active(static_cast<std::size_t>(n), false);
  const auto update_active = [&](const Eigen::VectorXd& g) {
    for (Eigen::Index j = 0; j < n; ++j) {
      bool pinned = is_fixed(j);
      if (bounded && !pinned) {
        pinned = (x(j) <= problem.lower(j) && g(j) > 0.0) ||
                 (x(j) >= problem.upper(j) && g(j) < 0.0);
      }
      active[static_cast<std::size_t>(j)] = pinned;
    }
  };

  const auto gradient_measure = [&](const Eigen::VectorXd& g) {
    const double rnorm = r.norm();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (active[static_cast<std::size_t>(j)]) continue;
      const double cnorm = jac.col(j).norm();
      if (cnorm == 0.0 || rnorm == 0.0) continue;
      worst = std::max(worst, std::abs(g(j)) / (cnorm * rnorm));
    }
    return worst;
  };

  LeastSquaresResult result;
  double lambda = options.initial_damping;
  int iteration = 0;
  LeastSquaresStop stop = LeastSquaresStop::max_iterations;
  double measure = 0.0;

  for (;;) {
    Eigen::VectorXd g = jac.transpose() * r;
    update_active(g);
    measure = gradient_measure(g);
    if (r.norm() <= floor_norm) {
      stop = LeastSquaresStop::exact_fit;
      break;
    }
    if (measure <= options.gradient_tolerance) {
      stop = LeastSquaresStop::gradient;
      break;
    }
    if (iteration >= options.max_iterations) {
      stop = LeastSquaresStop::max_iterations;
      break;
    }

    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!active[static_cast<std::size_t>(j)]) free.push_back(j);
    const auto k = static_cast<Eigen::Index>(free.size());
    if (k == 0) {
      stop = LeastSquaresStop::gradient;
      break;
    }
    Eigen::MatrixXd jf(jac.rows(), k);
    Eigen::VectorXd gf(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      jf.col(i) = jac.col(free[static_cast<std::size_t>(i)]);
      gf(i) = g(free[static_cast<std::size_t>(i)]);
    }
    const Eigen::MatrixXd normal = jf.transpose() * jf;
    Eigen::VectorXd scale = normal.diagonal();
    const double floor = std::max(scale.maxCoeff(), 1e-300) * 1e-12;
    scale = scale.cwiseMax(floor);

    bool accepted = false;
    bool tiny_step = false;
    while (!accepted) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal() += lambda * scale;
      const Eigen::VectorXd delta = damped.ldlt().solve(-gf);
      Eigen::VectorXd candidate = x;
      for (Eigen::Index i = 0; i < k; ++i) candidate(free[static_cast<std::size_t>(i)]) += delta(i);
      clamp(candidate);

      bool small = true;
      for (Eigen::Index j = 0; j < n && small; ++j)
        small = std::abs(candidate(j) - x(j)) <=
                options.step_tolerance * (std::abs(x(j)) + options.step_tolerance);
      if (!delta.allFinite()) {
        tiny_step = true;
        break;
      }
      Eigen::VectorXd r_new;
      eval.residuals(candidate, r_new);
      const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm()
                                                : std::numeric_limits<double>::infinity();
      bool better = cost_new < cost;
      Eigen::MatrixXd jac_new;
      if (!better && cost_new <= cost + options.cost_noise) {
        // Indistinguishable costs: judge by the (accurately computed) gradient.
        eval.jacobian(candidate, jac_new);
        const Eigen::VectorXd g_new = jac_new.transpose() * r_new;
        double before = 0.0, after = 0.0;
        for (const auto j : free) {
          before += g(j) * g(j);
          after += g_new(j) * g_new(j);
        }
        better = after < before;
      }
      if (better) {
        x = std::move(candidate);
        r = std::move(r_new);
        cost = cost_new;
        lambda = std::max(lambda * 0.1, 1e-15);
        accepted = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) break;
      }
      if (small) {
        tiny_step = true;
        break;
      }
    }
    if (accepted) {
      ++iteration;
      eval.jacobian(x, jac);
    }
    if (tiny_step) {
      g = jac.transpose() * r;
      update_active(g);
      measure = gradient_measure(g);
      stop = r.norm() <= floor_norm ? LeastSquaresStop::exact_fit : LeastSquaresStop::small_step;
      break;
    }
    if (!accepted) {
      stop = LeastSquaresStop::stalled;
      break;
    }
  }

  result.converged = stop == LeastSquaresStop::gradient || stop == LeastSquaresStop::exact_fit ||
                     (stop == LeastSquaresStop::small_step && measure <= options.gradient_tolerance);
  result.stop = stop;
  result.gradient_measure = measure;
  result.iterations = iteration;
  result.cost = cost;
  result.at_bound.assign(static_cast<std::size_t>(n), false);
  if (bounded) {
    for (Eigen::Index j = 0; j < n; ++j)
      result.at_bound[static_cast<std::size_t>(j)] =
          !is_fixed(j) && (x(j) <= problem.lower(j) || x(j) >= problem.upper(j));
  }
  result.x = std::move(x);
  result.residuals = std::move(r);
  result.jacobian = std::move(jac);
  return result;
}

Eigen::VectorXd parameter_variances(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& residuals,
                                    const std::vector<bool>& fixed) {
  const Eigen::Index n = jacobian.cols();
  const Eigen::Index m = jacobian.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> free;
  for (Eigen::Index j = 0; j < n; ++j)
    if (fixed.empty() || !fixed[static_cast<std::size_t>(j)]) free.push_back(j);
  const auto p = static_cast<Eigen::Index>(free.size());
  if (p == 0) return out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (m <= p) {
    for (const auto j : free) out(j) = inf;
    return out;
  }

  Eigen::MatrixXd jf(m, p);
  for (Eigen::Index i = 0; i < p; ++i) jf.col(i) = jacobian.col(free[static_cast<std::size_t>(i)]);
  // Column scaling keeps the conditioning test meaningful across units.
  Eigen::VectorXd col_scale(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    col_scale(i) = jf.col(i).norm();
    if (col_scale(i) > 0.0) jf.col(i) /= col_scale(i);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jf, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double s2 = residuals.squaredNorm() / static_cast<double>(m - p);
  const double cutoff = 1e-10 * std::max(sv.maxCoeff(), 1e-300);

  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::Index j = free[static_cast<std::size_t>(i)];
    if (col_scale(i) == 0.0) {
      out(j) = inf;
      continue;
    }
    double acc = 0.0;
    bool unconstrained = false;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      const double vik = svd.matrixV()(i, k);
      if (sv(k) <= cutoff) {
        if (std::abs(vik) > 1e-8) unconstrained = true;
        continue;
      }
      acc += vik * vik / (sv(k) * sv(k));
    }
    out(j) = unconstrained ? inf : s2 * acc / (col_scale(i) * col_scale(i));
  }
  return out;
}

}  // namespace vbodmr
