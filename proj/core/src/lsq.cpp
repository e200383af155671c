#include "rodtrap/lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rodtrap/error.hpp"

namespace rodtrap::lsq {

Eigen::MatrixXd Result::covariance(Eigen::Index n_residuals) const {
  const Eigen::Index dof = n_residuals - params.size();
  const double s2 = dof > 0 ? 2.0 * cost / static_cast<double>(dof) : 0.0;
  return s2 * jtj_inverse;
}

// Marquardt-scaled damping (JᵀJ + μ·diag(JᵀJ)) with Nielsen's update of μ
// from the gain ratio between actual and predicted cost reduction.
Result levenberg_marquardt(const Problem& problem, const Eigen::VectorXd& start, const Options& opts) {
  const Eigen::Index n = problem.residuals;
  const Eigen::Index m = start.size();
  if (n < m || m == 0) throw InvalidArgument("least squares needs at least as many residuals as parameters");

  Eigen::VectorXd p = start;
  Eigen::VectorXd r(n), r_new(n);
  Eigen::MatrixXd J(n, m);

  problem.residual(p, r);
  if (!r.allFinite()) throw FitError("residuals are not finite at the starting point");
  double cost = 0.5 * r.squaredNorm();

  Result res;
  res.cost_trace.push_back(cost);

  double mu = opts.initial_damping;
  double nu = 2.0;
  bool need_jacobian = true;
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd g(m), diag(m);

  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    if (need_jacobian) {
      problem.jacobian(p, J);
      A.noalias() = J.transpose() * J;
      g.noalias() = J.transpose() * r;
      diag = A.diagonal().cwiseMax(1e-300);
      need_jacobian = false;
      const double gnorm = (g.array() / diag.array().sqrt()).abs().maxCoeff();
      // Scale-free: cosine between r and each Jacobian column.
      if (cost == 0.0 || gnorm <= opts.gradient_tol * std::sqrt(2.0 * cost)) {
        res.converged = true;
        res.reason = "gradient below tolerance";
        break;
      }
    }

    Eigen::MatrixXd damped = A;
    damped.diagonal() += mu * diag;
    const Eigen::VectorXd step = damped.ldlt().solve(-g);
    if (!step.allFinite()) throw FitError("singular normal equations", res.cost_trace);

    if (step.norm() <= opts.step_tol * (p.norm() + opts.step_tol)) {
      res.converged = true;
      res.reason = "step below tolerance";
      break;
    }

    const Eigen::VectorXd trial = p + step;
    problem.residual(trial, r_new);
    const double new_cost = r_new.allFinite() ? 0.5 * r_new.squaredNorm() : INFINITY;
    // Predicted reduction of the quadratic model.
    const double predicted = -(step.dot(g) + 0.5 * step.dot(A * step));
    const double rho = predicted > 0.0 ? (cost - new_cost) / predicted : -1.0;

    if (rho > 0.0) {
      const double drop = cost - new_cost;
      p = trial;
      r = r_new;
      cost = new_cost;
      res.cost_trace.push_back(cost);
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      need_jacobian = true;
      if (drop <= opts.cost_tol * std::max(cost, 1e-300) || cost == 0.0) {
        res.converged = true;
        res.reason = "cost reduction below tolerance";
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) {
        res.reason = "damping overflow";
        break;
      }
    }
  }
  if (!res.converged && res.reason.empty()) res.reason = "iteration limit reached";

  problem.jacobian(p, J);
  A.noalias() = J.transpose() * J;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  res.jtj_inverse = lu.isInvertible() ? Eigen::MatrixXd(lu.inverse())
                                      : Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
  res.params = p;
  res.cost = cost;
  return res;
}

}  // namespace rodtrap::lsq
