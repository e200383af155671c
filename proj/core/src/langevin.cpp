#include "rodtrap/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rodtrap/error.hpp"
#include "rodtrap/random.hpp"

namespace rodtrap::langevin {

TrapStiffness TrapStiffness::from_depth(Joules depth, Meters width) {
  if (!(depth.value() > 0.0)) throw InvalidArgument("trap depth must be positive");
  if (!(width.value() > 0.0)) throw InvalidArgument("trap width must be positive");
  return {2.0 * depth.value() / (width.value() * width.value()), width};
}

double TrapStiffness::angular_frequency(Kilograms m) const { return std::sqrt(k_z / m.value()); }

void TimeSeries::validate() const {
  if (!(sample_interval > 0.0)) throw InvalidArgument("sample interval must be positive");
  for (double v : samples)
    if (!std::isfinite(v)) throw InvalidArgument("time series holds non-finite samples");
}

void validate_sim(const SimConfig& cfg, RadPerSec gamma, double omega) {
  const double dt = cfg.time_step.value();
  if (!(dt > 0.0) || !(cfg.duration.value() > 0.0) || cfg.record_stride == 0)
    throw InvalidArgument("time step, duration and record stride must be positive");
  const double fastest = std::max(gamma.value(), omega);
  if (!(dt < 1.0 / (10.0 * fastest)))
    throw InvalidArgument("unstable step: time step must be below 1/(10·max(Γ, Ω))");
  if (gamma.value() > 0.0 && cfg.thermal && cfg.duration.value() < 100.0 / gamma.value())
    throw InvalidArgument("duration must cover at least 100/Γ");
}

TimeSeries simulate_axial_motion(const TrapStiffness& stiffness, RadPerSec gamma, Kilograms mass,
                                 Kelvin temperature, const SimConfig& cfg) {
  if (!(stiffness.k_z > 0.0) || !(mass.value() > 0.0) || gamma.value() < 0.0)
    throw InvalidArgument("stiffness and mass must be positive, damping non-negative");
  const double omega = stiffness.angular_frequency(mass);
  validate_sim(cfg, gamma, omega);

  const double dt = cfg.time_step.value();
  const double h = 0.5 * dt;
  const double w2 = stiffness.k_z / mass.value();
  const double kT = constants::boltzmann * temperature.value();
  const double c1 = std::exp(-gamma.value() * dt);
  const double c2 = cfg.thermal ? std::sqrt(kT / mass.value() * (1.0 - c1 * c1)) : 0.0;

  Rng rng = make_rng(cfg.seed, "langevin.axial");
  std::normal_distribution<double> normal(0.0, 1.0);

  double z = 0.0, v = 0.0;
  if (cfg.initial_z) {
    z = *cfg.initial_z;
    v = cfg.initial_v;
  } else if (cfg.thermal) {
    z = std::sqrt(kT / stiffness.k_z) * normal(rng);
    v = std::sqrt(kT / mass.value()) * normal(rng);
  }

  const auto steps = static_cast<std::size_t>(std::llround(cfg.duration.value() / dt));
  const std::size_t n_out = steps / cfg.record_stride;

  TimeSeries out;
  out.sample_interval = cfg.sample_interval().value();
  out.units = "m";
  out.seed = cfg.seed;
  out.samples.reserve(n_out);
  out.samples.push_back(z);

  std::size_t since = 0;
  while (out.samples.size() < n_out) {
    v -= h * w2 * z;
    z += h * v;
    v = c1 * v + (c2 != 0.0 ? c2 * normal(rng) : 0.0);
    z += h * v;
    v -= h * w2 * z;
    if (++since == cfg.record_stride) {
      out.samples.push_back(z);
      since = 0;
    }
  }
  return out;
}

TimeSeries detector_signal(const TimeSeries& z, const SimConfig& cfg) {
  z.validate();
  TimeSeries s;
  s.sample_interval = z.sample_interval;
  s.units = "V";
  s.seed = z.seed;
  s.samples.resize(z.samples.size());
  // One-sided density n² over bandwidth 1/(2Δt) gives variance n²/(2Δt).
  const double sigma = cfg.noise_floor * std::sqrt(0.5 / z.sample_interval);
  Rng rng = make_rng(cfg.seed, "langevin.detector");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < z.samples.size(); ++i) {
    s.samples[i] = cfg.detector_gain * z.samples[i];
    if (sigma > 0.0) s.samples[i] += sigma * normal(rng);
  }
  return s;
}

namespace {

// Tabulated inverse CDF of x = cosβ with density ∝ exp(u·(x² − 1)) on [0, 1].
class TiltSampler {
 public:
  explicit TiltSampler(double u, std::size_t nodes = 8192) : x_(nodes + 1), cdf_(nodes + 1) {
    auto density = [u](double x) { return std::exp(u * (x * x - 1.0)); };
    for (std::size_t i = 0; i <= nodes; ++i) x_[i] = static_cast<double>(i) / static_cast<double>(nodes);
    cdf_[0] = 0.0;
    for (std::size_t i = 1; i <= nodes; ++i) {
      const double a = x_[i - 1], b = x_[i], m = 0.5 * (a + b);
      cdf_[i] = cdf_[i - 1] + (b - a) / 6.0 * (density(a) + 4.0 * density(m) + density(b));
    }
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
  }

  double operator()(double q) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), q);
    const auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - cdf_.begin(), 1,
                                                                       static_cast<std::ptrdiff_t>(cdf_.size() - 1)));
    const double t = (q - cdf_[i - 1]) / std::max(cdf_[i] - cdf_[i - 1], 1e-300);
    return x_[i - 1] + std::clamp(t, 0.0, 1.0) * (x_[i] - x_[i - 1]);
  }

 private:
  std::vector<double> x_, cdf_;
};

}  // namespace

TiltSamples sample_tilt_distribution(Joules align_depth, Kelvin temperature, std::size_t n_samples,
                                     std::uint64_t seed) {
  if (align_depth.value() < 0.0) throw InvalidArgument("alignment depth must be non-negative");
  if (n_samples < 2) throw InvalidArgument("need at least two tilt samples");
  const double u = align_depth.value() / (constants::boltzmann * temperature.value());
  const TiltSampler sampler(u);
  Rng rng = make_rng(seed, "langevin.tilt");
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  TiltSamples out;
  out.beta.reserve(n_samples);
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x = sampler(uni(rng));
    out.beta.push_back(std::acos(x));
    const double c2 = x * x;
    s += c2;
    ss += c2 * c2;
  }
  const auto n = static_cast<double>(n_samples);
  out.mean_cos2 = s / n;
  out.stderr_cos2 = std::sqrt(std::max(0.0, ss / n - out.mean_cos2 * out.mean_cos2) / (n - 1.0));
  return out;
}

double mean_cos2_tilt(double u) {
  if (u < 0.0) throw InvalidArgument("alignment depth must be non-negative");
  using boost::math::quadrature::gauss_kronrod;
  auto w = [u](double x) { return std::exp(u * (x * x - 1.0)); };
  auto xw = [u](double x) { return x * x * std::exp(u * (x * x - 1.0)); };
  const double z = gauss_kronrod<double, 61>::integrate(w, 0.0, 1.0, 15, 1e-14);
  const double m = gauss_kronrod<double, 61>::integrate(xw, 0.0, 1.0, 15, 1e-14);
  return m / z;
}

Joules alignment_depth(Watts power, Polarizability anisotropy, double field_factor) {
  if (power.value() < 0.0 || anisotropy.value() < 0.0 || !(field_factor > 0.0))
    throw InvalidArgument("alignment depth inputs out of range");
  return Joules(0.5 * anisotropy.value() * field_factor * power.value());
}

double apparent_a_pi(Watts power, double intrinsic_a_pi, Polarizability anisotropy, double field_factor,
                     Kelvin temperature) {
  if (!(intrinsic_a_pi >= 0.0 && intrinsic_a_pi <= 1.0)) throw InvalidArgument("a_pi must lie in [0, 1]");
  const double u =
      alignment_depth(power, anisotropy, field_factor).value() / (constants::boltzmann * temperature.value());
  return intrinsic_a_pi * mean_cos2_tilt(u);
}

}  // namespace rodtrap::langevin
