#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "rodtrap/analysis.hpp"
#include "rodtrap/error.hpp"
#include "rodtrap/lsq.hpp"

namespace rodtrap::analysis {

double lorentzian(double f, double amplitude, double f0, double width_hz, double background) {
  const double h = 0.5 * width_hz;
  const double u = f - f0;
  return amplitude * h * h / (u * u + h * h) + background;
}

namespace {

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

// Initial guesses: peak = maximum of a 5-bin moving average inside the search
// band, background = band median, half-width from the half-maximum crossings.
LorentzianFit fit_lorentzian(const Spectrum& spectrum, const LorentzianOptions& opts) {
  spectrum.validate();
  const auto& f = spectrum.frequency;
  const auto& S = spectrum.density;
  const double df = spectrum.resolution_bandwidth;

  std::size_t lo = 1;
  std::size_t hi = f.size() - 1;
  if (opts.f_min > 0.0) lo = std::max(lo, static_cast<std::size_t>(std::ceil(opts.f_min / df)));
  if (opts.f_max > 0.0) hi = std::min(hi, static_cast<std::size_t>(std::floor(opts.f_max / df)));
  if (hi <= lo + 16) throw InsufficientData("search band holds too few spectral bins");

  std::vector<double> band(S.begin() + static_cast<std::ptrdiff_t>(lo), S.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  const double b0 = median(band);
  std::vector<double> diffs;
  diffs.reserve(band.size() - 1);
  for (std::size_t i = 1; i < band.size(); ++i) diffs.push_back(std::abs(band[i] - band[i - 1]));
  const double noise = median(diffs) / (0.6745 * std::sqrt(2.0));

  constexpr std::size_t kSmooth = 5;
  std::size_t ipk = lo;
  double spk = -INFINITY;
  for (std::size_t i = lo; i <= hi; ++i) {
    const std::size_t a = i >= lo + kSmooth / 2 ? i - kSmooth / 2 : lo;
    const std::size_t b = std::min(hi, i + kSmooth / 2);
    double m = 0.0;
    for (std::size_t j = a; j <= b; ++j) m += S[j];
    m /= static_cast<double>(b - a + 1);
    if (m > spk) {
      spk = m;
      ipk = i;
    }
  }
  const double height = spk - b0;
  const double snr = noise > 0.0 ? height / noise : (height > 0.0 ? INFINITY : 0.0);
  if (!(snr >= opts.min_snr)) throw NoPeakError("no spectral peak above the SNR threshold");

  const double half = b0 + 0.5 * height;
  std::size_t l = ipk, r = ipk;
  while (l > lo && S[l] > half) --l;
  while (r < hi && S[r] > half) ++r;
  const double h0 = std::max(df, 0.5 * static_cast<double>(r - l) * df);

  const double f_peak = f[ipk];
  const double span = opts.window_halfwidths * h0;
  const auto w_lo = std::max(lo, static_cast<std::size_t>(std::max(0.0, std::floor((f_peak - span) / df))));
  const auto w_hi = std::min(hi, static_cast<std::size_t>(std::ceil((f_peak + span) / df)));
  const std::size_t n = w_hi - w_lo + 1;
  if (n < 8) throw NoPeakError("peak too narrow to fit");

  // Normalized coordinates: x = (f − f_peak)/h0, y = S/height.
  Eigen::VectorXd x(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    x(static_cast<Eigen::Index>(i)) = (f[w_lo + i] - f_peak) / h0;
    y(static_cast<Eigen::Index>(i)) = S[w_lo + i] / height;
  }

  lsq::Problem prob;
  prob.residuals = x.size();
  prob.residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& res) {
    const double h2 = p(2) * p(2);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double u = x(i) - p(1);
      res(i) = p(0) * h2 / (u * u + h2) + p(3) - y(i);
    }
  };
  prob.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& J) {
    const double h = p(2), h2 = h * h;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double u = x(i) - p(1);
      const double D = u * u + h2;
      J(i, 0) = h2 / D;
      J(i, 1) = p(0) * h2 * 2.0 * u / (D * D);
      J(i, 2) = p(0) * 2.0 * h * u * u / (D * D);
      J(i, 3) = 1.0;
    }
  };
  Eigen::VectorXd start(4);
  start << 1.0, 0.0, 1.0, b0 / height;
  lsq::Options lo_opts;
  lo_opts.max_iterations = opts.max_iterations;
  const lsq::Result res = lsq::levenberg_marquardt(prob, start, lo_opts);
  if (!res.converged) throw FitError("Lorentzian fit did not converge: " + res.reason, res.cost_trace);

  const double h = std::abs(res.params(2)) * h0;
  if (!(res.params(0) > 0.0)) throw NoPeakError("fitted Lorentzian amplitude is not positive");
  if (h < 0.5 * df) throw NoPeakError("fitted peak is narrower than the frequency resolution");

  LorentzianFit fit;
  fit.amplitude = res.params(0) * height;
  fit.f0 = f_peak + res.params(1) * h0;
  fit.width_hz = 2.0 * h;
  fit.gamma = 2.0 * std::numbers::pi * fit.width_hz;
  fit.background = res.params(3) * height;
  fit.snr = snr;
  fit.iterations = res.iterations;
  fit.residual_norm = std::sqrt(2.0 * res.cost) * height;

  const Eigen::MatrixXd cov = res.covariance(prob.residuals);
  const double sigma_w = 2.0 * h0 * std::sqrt(std::max(0.0, cov(2, 2)));
  const boost::math::students_t t_dist(static_cast<double>(n - 4));
  const double t = boost::math::quantile(boost::math::complement(t_dist, 0.025));
  fit.width_ci_low = std::max(0.0, fit.width_hz - t * sigma_w);
  fit.width_ci_high = fit.width_hz + t * sigma_w;
  return fit;
}

}  // namespace rodtrap::analysis
