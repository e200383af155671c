#pragma once

// Pulse-by-pulse Monte Carlo of a trapped emitter cluster under pulsed
// excitation, through the Hanbury Brown-Twiss detector pair.

#include <cstdint>
#include <string>
#include <vector>

#include "rodtrap/random.hpp"

namespace rodtrap::emitter {

struct ExcitationConfig {
  double repetition_rate = 1e6;      // 1/s
  double pulse_duration = 82e-9;     // s, informational
  double power = 2e-6;               // W
  double saturation_power = 2.63e-6;  // W
  double saturation_power_err = 0.43e-6;

  void validate() const;
  [[nodiscard]] double mean_excitons() const { return power / saturation_power; }
};

enum class BlinkMode { none, two_state, burst };
std::string to_string(BlinkMode m);
BlinkMode blink_mode_from_string(const std::string& s);

struct BlinkModel {
  BlinkMode mode = BlinkMode::none;
  double grey_factor = 3.0;      // grey emission = bright / grey_factor
  double bright_dwell = 10e-3;   // s, mean
  double grey_dwell = 40e-3;     // s, mean
  double burst_dwell = 2e-3;     // s, mean episode length in burst mode
  double burst_mean_level = 0.2;  // mean of the exponential emission level in burst mode

  void validate() const;
  /// Long-time mean of the emission level.
  [[nodiscard]] double mean_level() const;
};

struct EmitterModel {
  int n_rods = 1;
  double quantum_yield = 0.7;
  double auger_probability = 1.0;  // p_A
  int independent_emitters = 1;    // emitters sharing the pulse but not their excitons
  BlinkModel blink{};

  void validate() const;
};

/// Empirical size dependence p_A(N) = p0·exp(−(N−1)/N0).
double auger_probability_for_size(int n_rods, double p0 = 0.936, double n0 = 345.0);

struct DetectionChain {
  double apd_qe = 0.69;
  double pm_reflectivity = 0.72;
  double setup_transmission = 0.83;
  double a_pi = 0.31;
  double a_pi_err = 0.03;
  double linear_efficiency = 0.94;
  double circular_efficiency = 0.76;
  double splitter_ratio = 0.5;  // probability of channel 1

  /// Factors must lie in (0, 1], or [0, 1] when `allow_zero` is set.
  void validate(bool allow_zero = false) const;
  [[nodiscard]] double collection() const;
  /// Probability that an emitted photon produces a click on either APD.
  [[nodiscard]] double detection_probability() const;
};

int excitons_per_pulse(double power, double saturation_power, Rng& rng);

/// Pairwise reduction: while two or more excitons remain, one pair merges into
/// one with probability p_A; the first failure releases all remaining
/// excitons to radiate. Returns the number of radiating excitons.
int auger_reduce(int excitons, double p_auger, Rng& rng);

/// Exact distribution of auger_reduce's output for a given input count.
std::vector<double> auger_output_distribution(int excitons, double p_auger);

// Piecewise-constant emission level; segment i covers
// [starts[i], starts[i+1]) with the last one running to `duration`.
struct BlinkTrajectory {
  double duration = 0.0;
  std::vector<double> starts;
  std::vector<double> levels;
  std::vector<int> states;  // 0 bright, 1 grey, 2 burst episode

  [[nodiscard]] double level_at(double t) const;
  [[nodiscard]] double time_fraction(int state) const;
};

BlinkTrajectory blink_trajectory(double duration, const BlinkModel& model, Rng& rng);

struct TimeTag {
  std::uint8_t channel = 0;
  double time = 0.0;  // s

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

struct TimeTagStream {
  std::vector<TimeTag> events;
  double duration = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] std::size_t count(std::uint8_t channel) const;
};

struct GenerationStats {
  std::uint64_t pulses = 0;
  std::uint64_t excitons = 0;
  std::uint64_t radiating = 0;  // after Auger reduction
  std::uint64_t emitted = 0;    // after quantum yield and blinking
  std::uint64_t detected = 0;
};

struct GenerationOptions {
  bool jitter = false;  // uniform arrival jitter within the pulse duration
  GenerationStats* stats = nullptr;
  BlinkTrajectory* trajectory = nullptr;  // receives the blink ground truth when set
};

TimeTagStream generate_time_tags(const ExcitationConfig& excitation, const EmitterModel& emitter,
                                 const DetectionChain& chain, double duration, std::uint64_t seed,
                                 const GenerationOptions& opts = {});

struct RateEstimate {
  double rate = 0.0;
  double uncertainty = 0.0;
};

/// γ_exc·Q_APD·T·R_PM·[1 − exp(−P/P_sat)]·Q_DR·collection(a_π), times the
/// number of independent emitters, with first-order uncertainty from P_sat and a_π.
RateEstimate expected_count_rate(const ExcitationConfig& excitation, const EmitterModel& emitter,
                                 const DetectionChain& chain);

}  // namespace rodtrap::emitter
