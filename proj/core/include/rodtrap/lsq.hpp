#pragma once

// Levenberg-Marquardt trust-region solver for small dense nonlinear
// least-squares problems with analytic Jacobians.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rodtrap::lsq {

struct Problem {
  Eigen::Index residuals = 0;
  // r(p): fills `r` (size `residuals`).
  std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)> residual;
  // J(p) = ∂r/∂p: fills `J` (residuals × params).
  std::function<void(const Eigen::VectorXd& p, Eigen::MatrixXd& J)> jacobian;
};

struct Options {
  int max_iterations = 200;
  double gradient_tol = 1e-12;  // on ‖D⁻¹Jᵀr‖∞ relative to the cost
  double step_tol = 1e-12;      // relative parameter change
  double cost_tol = 1e-15;      // relative cost reduction
  double initial_damping = 1e-3;
};

struct Result {
  Eigen::VectorXd params;
  Eigen::MatrixXd jtj_inverse;  // (JᵀJ)⁻¹ at the solution
  double cost = 0.0;            // ½‖r‖²
  int iterations = 0;
  bool converged = false;
  std::string reason;
  std::vector<double> cost_trace;

  /// s²·(JᵀJ)⁻¹ with s² = 2·cost/(n − p).
  [[nodiscard]] Eigen::MatrixXd covariance(Eigen::Index n_residuals) const;
};

Result levenberg_marquardt(const Problem& problem, const Eigen::VectorXd& start, const Options& opts = {});

}  // namespace rodtrap::lsq
