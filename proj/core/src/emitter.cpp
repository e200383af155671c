#include "rodtrap/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rodtrap/error.hpp"

namespace rodtrap::emitter {

namespace {
bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }
bool in_open_unit(double v) { return v > 0.0 && v <= 1.0; }
}  // namespace

void ExcitationConfig::validate() const {
  if (!(repetition_rate > 0.0)) throw InvalidArgument("repetition rate must be positive");
  if (!(power >= 0.0 && saturation_power > 0.0)) throw InvalidArgument("excitation powers out of range");
  if (!(pulse_duration >= 0.0 && pulse_duration < 1.0 / repetition_rate))
    throw InvalidArgument("pulse duration must be shorter than the pulse period");
  if (!(saturation_power_err >= 0.0)) throw InvalidArgument("saturation power error must be non-negative");
}

std::string to_string(BlinkMode m) {
  switch (m) {
    case BlinkMode::none: return "none";
    case BlinkMode::two_state: return "two_state";
    case BlinkMode::burst: return "burst";
  }
  return "none";
}

BlinkMode blink_mode_from_string(const std::string& s) {
  if (s == "none") return BlinkMode::none;
  if (s == "two_state") return BlinkMode::two_state;
  if (s == "burst") return BlinkMode::burst;
  throw InvalidArgument("unknown blink mode '" + s + "'");
}

void BlinkModel::validate() const {
  if (!(grey_factor >= 1.0)) throw InvalidArgument("grey factor must be at least 1");
  if (!(bright_dwell > 0.0 && grey_dwell >= 0.0 && burst_dwell > 0.0))
    throw InvalidArgument("blink dwell times must be positive");
  if (!(burst_mean_level > 0.0 && burst_mean_level <= 1.0))
    throw InvalidArgument("burst mean level must lie in (0, 1]");
}

double BlinkModel::mean_level() const {
  switch (mode) {
    case BlinkMode::none: return 1.0;
    case BlinkMode::two_state: {
      const double fb = bright_dwell / (bright_dwell + grey_dwell);
      return fb + (1.0 - fb) / grey_factor;
    }
    case BlinkMode::burst:
      // E[min(U, 1)] for U ~ Exp(mean μ): μ·(1 − e^{−1/μ}).
      return burst_mean_level * (1.0 - std::exp(-1.0 / burst_mean_level));
  }
  return 1.0;
}

void EmitterModel::validate() const {
  if (n_rods < 1) throw InvalidArgument("emitter needs at least one rod");
  if (independent_emitters < 1) throw InvalidArgument("need at least one independent emitter");
  if (!in_unit(quantum_yield) || !in_unit(auger_probability))
    throw InvalidArgument("quantum yield and Auger probability must lie in [0, 1]");
  blink.validate();
}

double auger_probability_for_size(int n_rods, double p0, double n0) {
  if (n_rods < 1 || !in_unit(p0) || !(n0 > 0.0)) throw InvalidArgument("Auger size model out of range");
  return p0 * std::exp(-(n_rods - 1) / n0);
}

void DetectionChain::validate(bool allow_zero) const {
  auto ok = [allow_zero](double v) { return allow_zero ? in_unit(v) : in_open_unit(v); };
  if (!ok(apd_qe) || !ok(pm_reflectivity) || !ok(setup_transmission) || !ok(linear_efficiency) ||
      !ok(circular_efficiency))
    throw InvalidArgument("detection chain factors must lie in (0, 1]");
  if (!in_unit(a_pi) || !in_unit(splitter_ratio) || !(a_pi_err >= 0.0))
    throw InvalidArgument("a_pi and splitter ratio must lie in [0, 1]");
}

double DetectionChain::collection() const {
  return linear_efficiency * a_pi + circular_efficiency * (1.0 - a_pi);
}

double DetectionChain::detection_probability() const {
  return collection() * pm_reflectivity * setup_transmission * apd_qe;
}

int excitons_per_pulse(double power, double saturation_power, Rng& rng) {
  if (!(power >= 0.0 && saturation_power > 0.0)) throw InvalidArgument("excitation powers out of range");
  if (power == 0.0) return 0;
  std::poisson_distribution<int> pois(power / saturation_power);
  return pois(rng);
}

int auger_reduce(int excitons, double p_auger, Rng& rng) {
  if (excitons < 0) throw InvalidArgument("exciton count must be non-negative");
  std::bernoulli_distribution merge(p_auger);
  int k = excitons;
  while (k >= 2) {
    if (!merge(rng)) break;
    --k;
  }
  return k;
}

std::vector<double> auger_output_distribution(int excitons, double p_auger) {
  if (excitons < 0) throw InvalidArgument("exciton count must be non-negative");
  std::vector<double> p(static_cast<std::size_t>(excitons) + 1, 0.0);
  if (excitons <= 1) {
    p[static_cast<std::size_t>(excitons)] = 1.0;
    return p;
  }
  double survive = 1.0;  // probability of reaching k with all merges so far succeeding
  for (int k = excitons; k >= 2; --k) {
    p[static_cast<std::size_t>(k)] += survive * (1.0 - p_auger);
    survive *= p_auger;
  }
  p[1] += survive;
  return p;
}

double BlinkTrajectory::level_at(double t) const {
  if (starts.empty()) return 1.0;
  const auto it = std::upper_bound(starts.begin(), starts.end(), t);
  const auto i = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
  return levels[i];
}

double BlinkTrajectory::time_fraction(int state) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const double end = i + 1 < starts.size() ? starts[i + 1] : duration;
    if (states[i] == state) acc += end - starts[i];
  }
  return duration > 0.0 ? acc / duration : 0.0;
}

BlinkTrajectory blink_trajectory(double duration, const BlinkModel& model, Rng& rng) {
  if (!(duration > 0.0)) throw InvalidArgument("trajectory duration must be positive");
  model.validate();
  BlinkTrajectory tr;
  tr.duration = duration;
  if (model.mode == BlinkMode::none || (model.mode == BlinkMode::two_state && model.grey_dwell == 0.0)) {
    tr.starts = {0.0};
    tr.levels = {1.0};
    tr.states = {0};
    return tr;
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto exp_draw = [&](double mean) { return -mean * std::log1p(-uni(rng)); };

  double t = 0.0;
  if (model.mode == BlinkMode::two_state) {
    // Start from the stationary occupation so short runs are unbiased.
    int state = uni(rng) < model.bright_dwell / (model.bright_dwell + model.grey_dwell) ? 0 : 1;
    while (t < duration) {
      tr.starts.push_back(t);
      tr.states.push_back(state);
      tr.levels.push_back(state == 0 ? 1.0 : 1.0 / model.grey_factor);
      t += exp_draw(state == 0 ? model.bright_dwell : model.grey_dwell);
      state = 1 - state;
    }
  } else {
    while (t < duration) {
      tr.starts.push_back(t);
      tr.states.push_back(2);
      tr.levels.push_back(std::min(1.0, exp_draw(model.burst_mean_level)));
      t += exp_draw(model.burst_dwell);
    }
  }
  return tr;
}

void TimeTagStream::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].channel > 1) throw InvalidArgument("time tag channel must be 0 or 1");
    if (events[i].time < 0.0 || events[i].time > duration) throw InvalidArgument("time tag outside acquisition window");
    if (i > 0 && events[i].time < events[i - 1].time) throw InvalidArgument("time tags must be non-decreasing");
  }
}

std::size_t TimeTagStream::count(std::uint8_t channel) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [channel](const TimeTag& e) { return e.channel == channel; }));
}

TimeTagStream generate_time_tags(const ExcitationConfig& excitation, const EmitterModel& emitter,
                                 const DetectionChain& chain, double duration, std::uint64_t seed,
                                 const GenerationOptions& opts) {
  excitation.validate();
  emitter.validate();
  if (!(duration > 0.0)) throw InvalidArgument("acquisition duration must be positive");
  chain.validate(/*allow_zero=*/true);

  Rng blink_rng = make_rng(seed, "emitter.blink");
  BlinkTrajectory traj = blink_trajectory(duration, emitter.blink, blink_rng);

  Rng rng = make_rng(seed, "emitter.pulses");
  const double period = 1.0 / excitation.repetition_rate;
  const auto pulses = static_cast<std::uint64_t>(std::floor(duration * excitation.repetition_rate));
  const double det_p = chain.detection_probability();
  const double mean_k = excitation.mean_excitons();

  std::poisson_distribution<int> pois(mean_k > 0.0 ? mean_k : 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  GenerationStats stats;
  stats.pulses = pulses;
  TimeTagStream out;
  out.duration = duration;
  out.seed = seed;
  out.events.reserve(static_cast<std::size_t>(static_cast<double>(pulses) * mean_k * det_p * 1.2) + 16);

  std::size_t seg = 0;
  for (std::uint64_t p = 0; p < pulses; ++p) {
    const double t0 = static_cast<double>(p) * period;
    while (seg + 1 < traj.starts.size() && traj.starts[seg + 1] <= t0) ++seg;
    const double emit_p = emitter.quantum_yield * traj.levels[seg];
    const std::size_t first = out.events.size();
    for (int e = 0; e < emitter.independent_emitters; ++e) {
      const int k = mean_k > 0.0 ? pois(rng) : 0;
      if (k == 0) continue;
      const int n = auger_reduce(k, emitter.auger_probability, rng);
      stats.excitons += static_cast<std::uint64_t>(k);
      stats.radiating += static_cast<std::uint64_t>(n);
      for (int ph = 0; ph < n; ++ph) {
        if (uni(rng) >= emit_p) continue;
        ++stats.emitted;
        if (uni(rng) >= det_p) continue;
        ++stats.detected;
        TimeTag tag;
        tag.channel = uni(rng) < chain.splitter_ratio ? 1 : 0;
        tag.time = t0 + (opts.jitter ? excitation.pulse_duration * uni(rng) : 0.0);
        out.events.push_back(tag);
      }
    }
    if (out.events.size() - first > 1)
      std::sort(out.events.begin() + static_cast<std::ptrdiff_t>(first), out.events.end(),
                [](const TimeTag& a, const TimeTag& b) {
                  return a.time < b.time || (a.time == b.time && a.channel < b.channel);
                });
  }
  if (opts.stats) *opts.stats = stats;
  if (opts.trajectory) *opts.trajectory = std::move(traj);
  return out;
}

RateEstimate expected_count_rate(const ExcitationConfig& excitation, const EmitterModel& emitter,
                                 const DetectionChain& chain) {
  excitation.validate();
  emitter.validate();
  chain.validate();
  const double x = excitation.mean_excitons();
  const double sat = 1.0 - std::exp(-x);
  const double coll = chain.collection();
  const double pre = excitation.repetition_rate * chain.apd_qe * chain.setup_transmission *
                     chain.pm_reflectivity * emitter.quantum_yield * emitter.independent_emitters;
  RateEstimate r;
  r.rate = pre * sat * coll;
  // ∂/∂P_sat of (1 − e^{−P/P_sat}) = −e^{−x}·x/P_sat; ∂coll/∂a_π = η_lin − η_circ.
  const double d_psat = pre * coll * std::exp(-x) * x / excitation.saturation_power;
  const double d_api = pre * sat * (chain.linear_efficiency - chain.circular_efficiency);
  r.uncertainty = std::hypot(d_psat * excitation.saturation_power_err, d_api * chain.a_pi_err);
  return r;
}

}  // namespace rodtrap::emitter
