#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string_view>
#include <vector>

namespace vbodmr {

// Box-bounded nonlinear least squares: minimize 0.5 * |r(x)|^2.
struct LeastSquaresProblem {
  Eigen::Index residual_count = 0;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)> residuals;
  // Analytic Jacobian dr/dx; central differences are used when empty.
  std::function<void(const Eigen::VectorXd& x, Eigen::MatrixXd& jac)> jacobian;
  Eigen::VectorXd lower;  // empty means unbounded
  Eigen::VectorXd upper;
  std::vector<bool> fixed;  // empty means all free
};

struct LeastSquaresOptions {
  int max_iterations = 200;
  // Converged when every free component satisfies
  // |J_j . r| <= gradient_tolerance * |J_j| * |r|.
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-12;  // per component, relative to |x_j|
  // |r| at or below this counts as an exact fit, as does |r| within
  // 1e3 machine epsilons of the starting |r|.
  double residual_floor = 0.0;
  double initial_damping = 1e-3;
  // Absolute uncertainty of the cost from roundoff in the residuals. A step
  // that raises the cost by no more than this is accepted when it reduces
  // the gradient norm.
  double cost_noise = 0.0;
};

enum class LeastSquaresStop { gradient, exact_fit, small_step, max_iterations, stalled };

std::string_view to_string(LeastSquaresStop stop) noexcept;

struct LeastSquaresResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;
  LeastSquaresStop stop = LeastSquaresStop::max_iterations;
  double gradient_measure = 0.0;  // the max ratio tested against gradient_tolerance
  std::vector<bool> at_bound;
};

LeastSquaresResult levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& options = {});

// Gauss-Newton variance estimates s^2 diag((J^T J)^-1) over the free
// parameters, s^2 = |r|^2 / (m - p). Fixed parameters get 0; directions the
// data do not constrain get +inf.
Eigen::VectorXd parameter_variances(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& residuals,
                                    const std::vector<bool>& fixed);

}  // namespace vbodmr
