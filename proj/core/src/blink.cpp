#include <algorithm>
#include <cmath>

#include "rodtrap/analysis.hpp"
#include "rodtrap/error.hpp"
#include "rodtrap/lsq.hpp"

namespace rodtrap::analysis {

std::string to_string(BlinkClass c) {
  switch (c) {
    case BlinkClass::grey_state_peak: return "grey_state_peak";
    case BlinkClass::exponential_burst: return "exponential_burst";
    case BlinkClass::two_state: return "two_state";
  }
  return "unknown";
}

GaussianFit fit_gaussian(const std::vector<double>& x, const std::vector<double>& y, GaussianFit start) {
  if (x.size() != y.size() || x.size() < 3) throw InsufficientData("Gaussian fit needs at least three points");
  if (!(start.sigma > 0.0)) throw InvalidArgument("starting sigma must be positive");
  const auto n = static_cast<Eigen::Index>(x.size());
  lsq::Problem prob;
  prob.residuals = n;
  prob.residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = (x[static_cast<std::size_t>(i)] - p(1)) / p(2);
      r(i) = p(0) * std::exp(-0.5 * u * u) - y[static_cast<std::size_t>(i)];
    }
  };
  prob.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& J) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = x[static_cast<std::size_t>(i)] - p(1);
      const double e = std::exp(-0.5 * d * d / (p(2) * p(2)));
      J(i, 0) = e;
      J(i, 1) = p(0) * e * d / (p(2) * p(2));
      J(i, 2) = p(0) * e * d * d / (p(2) * p(2) * p(2));
    }
  };
  Eigen::VectorXd p0(3);
  p0 << start.amplitude, start.mean, start.sigma;
  const auto res = lsq::levenberg_marquardt(prob, p0);
  if (!res.converged) throw FitError("Gaussian fit did not converge: " + res.reason, res.cost_trace);
  return {res.params(0), res.params(1), std::abs(res.params(2))};
}

namespace {

struct Peak {
  std::size_t index;
  std::size_t left;   // valley bounds
  std::size_t right;
  double prominence;
};

// Peaks of the 3-bin running sum whose prominence exceeds `threshold`
// standard deviations of the peak-minus-base count difference.
std::vector<Peak> prominent_peaks(const std::vector<std::uint64_t>& raw, double threshold) {
  const std::size_t n = raw.size();
  std::vector<double> h(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i ? i - 1 : 0; j <= std::min(n - 1, i + 1); ++j) h[i] += static_cast<double>(raw[j]);
  std::vector<Peak> out;
  for (std::size_t i = 1; i < n; ++i) {
    const bool left_ok = h[i] > h[i - 1];
    const bool right_ok = i + 1 == n || h[i] >= h[i + 1];
    if (!left_ok || !right_ok) continue;
    std::size_t l = i, lmin = i;
    while (l > 0 && h[l - 1] <= h[i]) {
      --l;
      if (h[l] < h[lmin]) lmin = l;
    }
    std::size_t r = i, rmin = i;
    while (r + 1 < n && h[r + 1] <= h[i]) {
      ++r;
      if (h[r] < h[rmin]) rmin = r;
    }
    const double base = std::max(h[lmin], h[rmin]);
    const double prom = h[i] - base;
    if (prom > threshold * std::sqrt(h[i] + base)) out.push_back({i, lmin, rmin, prom});
  }
  return out;
}

}  // namespace

BlinkHistogram blink_analysis(const emitter::TimeTagStream& stream, double bin_width, const BlinkOptions& opts) {
  stream.validate();
  if (!(bin_width > 0.0)) throw InvalidArgument("bin width must be positive");
  const auto nbins = static_cast<std::size_t>(std::floor(stream.duration / bin_width));
  if (nbins < opts.min_bins) throw InsufficientData("stream too short for a blinking histogram");

  BlinkHistogram out;
  out.bin_width = bin_width;
  out.trace.assign(nbins, 0);
  for (const auto& ev : stream.events) {
    const auto k = static_cast<std::size_t>(ev.time / bin_width);
    if (k < nbins) ++out.trace[k];
  }
  const std::uint64_t cmax = *std::max_element(out.trace.begin(), out.trace.end());
  const auto step = std::max<std::uint64_t>(1, (cmax + 120) / 120);
  out.count_step = static_cast<double>(step);
  const std::size_t hbins = static_cast<std::size_t>(cmax / step) + 1;
  out.histogram.assign(hbins, 0);
  out.rate_edges.resize(hbins);
  for (std::size_t i = 0; i < hbins; ++i) out.rate_edges[i] = static_cast<double>(i * step);
  for (auto c : out.trace) ++out.histogram[c / step];

  auto center = [&](std::size_t i) { return static_cast<double>(i * step) + 0.5 * static_cast<double>(step - 1); };

  // Log-linear test for a histogram decaying from the lowest bin.
  const auto argmax = static_cast<std::size_t>(
      std::max_element(out.histogram.begin(), out.histogram.end()) - out.histogram.begin());
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int m = 0;
    for (std::size_t i = 0; i < hbins; ++i) {
      if (out.histogram[i] < 5) continue;
      const double xv = center(i), yv = std::log(static_cast<double>(out.histogram[i]));
      sx += xv; sy += yv; sxx += xv * xv; sxy += xv * yv; syy += yv * yv;
      ++m;
    }
    if (m >= 3) {
      const double cxx = sxx - sx * sx / m, cyy = syy - sy * sy / m, cxy = sxy - sx * sy / m;
      out.burst_r2 = (cxx > 0 && cyy > 0) ? cxy * cxy / (cxx * cyy) : 0.0;
      if (cxy >= 0.0) out.burst_r2 = 0.0;
    }
  }

  // Poisson smoothing flattens the first few bins of a burst histogram, so
  // the mode only has to sit in the lowest tenth of the count range.
  const bool mode_at_floor = static_cast<double>(argmax * step) <= 0.1 * static_cast<double>(cmax);
  auto peaks = prominent_peaks(out.histogram, opts.peak_prominence);
  if (mode_at_floor && (out.burst_r2 >= opts.burst_r2 || peaks.empty())) {
    out.classification = BlinkClass::exponential_burst;
    return out;
  }
  if (peaks.empty()) peaks.push_back({argmax, 0, hbins - 1, 0.0});

  std::sort(peaks.begin(), peaks.end(), [](const Peak& p, const Peak& q) { return p.prominence > q.prominence; });
  if (peaks.size() > 2) peaks.resize(2);
  out.classification = peaks.size() == 2 ? BlinkClass::two_state : BlinkClass::grey_state_peak;

  std::vector<std::pair<double, double>> fitted;
  for (const auto& pk : peaks) {
    const double xc = center(pk.index);
    const double width = std::sqrt(std::max(xc, 1.0)) + static_cast<double>(step);
    std::vector<double> xs, ys;
    for (std::size_t i = pk.left; i <= pk.right; ++i) {
      if (std::abs(center(i) - xc) > 3.0 * width) continue;
      xs.push_back(center(i));
      ys.push_back(static_cast<double>(out.histogram[i]));
    }
    double mean = xc, sigma = width;
    try {
      const auto g = fit_gaussian(xs, ys, {static_cast<double>(out.histogram[pk.index]), xc, width});
      mean = g.mean;
      sigma = g.sigma;
    } catch (const Error&) {
      double w = 0, s1 = 0, s2 = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        w += ys[i];
        s1 += ys[i] * xs[i];
        s2 += ys[i] * xs[i] * xs[i];
      }
      if (w > 0) {
        mean = s1 / w;
        sigma = std::sqrt(std::max(0.0, s2 / w - mean * mean));
      }
    }
    fitted.emplace_back(mean, sigma);
  }
  std::sort(fitted.begin(), fitted.end());
  for (const auto& [m, s] : fitted) out.peak_means.push_back(m);
  out.grey_mean = fitted.front().first;
  out.grey_rms = fitted.front().second;
  out.grey_rate = out.grey_mean / bin_width;
  out.grey_rate_rms = out.grey_rms / bin_width;
  return out;
}

}  // namespace rodtrap::analysis
