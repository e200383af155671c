#include <algorithm>
#include <cmath>

#include "rodtrap/analysis.hpp"
#include "rodtrap/error.hpp"
#include "rodtrap/lsq.hpp"

namespace rodtrap::analysis {

SaturationFit fit_saturation(const std::vector<std::pair<double, double>>& power_rate) {
  if (power_rate.size() < 4) throw InsufficientData("saturation fit needs at least four points");
  std::vector<std::pair<double, double>> pts = power_rate;
  std::sort(pts.begin(), pts.end());
  for (const auto& [p, r] : pts)
    if (!(p > 0.0) || !std::isfinite(r)) throw InvalidArgument("saturation data need positive finite powers");

  const double pscale = pts[pts.size() / 2].first;
  double yscale = 0.0;
  for (const auto& pr : pts) yscale = std::max(yscale, std::abs(pr.second));
  if (yscale == 0.0) throw UndefinedResult("all rates are zero");

  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = pts[static_cast<std::size_t>(i)].first / pscale;
    y(i) = pts[static_cast<std::size_t>(i)].second / yscale;
  }

  // Start at the power where the curve crosses 1 − 1/e of its maximum.
  const double target = (1.0 - std::exp(-1.0)) * 1.05;
  double ps0 = x(n / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    if (y(i) >= target) {
      ps0 = x(i);
      break;
    }

  lsq::Problem prob;
  prob.residuals = n;
  prob.residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (Eigen::Index i = 0; i < n; ++i) r(i) = p(0) * (1.0 - std::exp(-x(i) / p(1))) - y(i);
  };
  prob.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& J) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = std::exp(-x(i) / p(1));
      J(i, 0) = 1.0 - e;
      J(i, 1) = -p(0) * e * x(i) / (p(1) * p(1));
    }
  };
  Eigen::VectorXd start(2);
  start << 1.05, ps0;
  lsq::Options o;
  o.max_iterations = 500;
  const auto res = lsq::levenberg_marquardt(prob, start, o);

  SaturationFit fit;
  fit.converged = res.converged;
  fit.amplitude = res.params(0) * yscale;
  fit.p_sat = std::abs(res.params(1)) * pscale;
  const auto cov = res.covariance(n);
  fit.amplitude_err = std::sqrt(std::max(0.0, cov(0, 0))) * yscale;
  fit.p_sat_err = std::sqrt(std::max(0.0, cov(1, 1))) * pscale;
  if (!res.converged) fit.warnings.push_back("fit did not converge: " + res.reason);
  if (pts.back().first < fit.p_sat) fit.warnings.emplace_back("data do not reach saturation; P_sat is ill-conditioned");
  if (pts.front().first > fit.p_sat) fit.warnings.emplace_back("no data below P_sat; the linear regime is unconstrained");
  if (!(fit.p_sat_err < 0.5 * fit.p_sat)) fit.warnings.emplace_back("P_sat uncertainty exceeds 50 %");
  return fit;
}

}  // namespace rodtrap::analysis
