#pragma once

// Synthetic campaigns behind the figure-reproduction command. Cells run in
// parallel with seeds derived from (root seed, campaign, cell), so results
// do not depend on the thread count.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rodtrap/config.hpp"
#include "rodtrap/trap.hpp"

namespace rodtrap::campaigns {

/// Calls fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

struct EfficiencyResult {
  double linear = 0.0;
  double circular = 0.0;
};
EfficiencyResult efficiency(const optics::MirrorGeometry& geom);

struct PminRow {
  int n_rods = 0;
  double p_min_w = 0.0;
};
std::vector<PminRow> pmin_table(const config::ExperimentConfig& base, const std::vector<int>& n_values);

struct GammaRow {
  int n_rods = 0;
  double radius_m = 0.0;
  double knudsen = 0.0;
  double slip_corrected_hz = 0.0;      // Γ/2π
  double geometric_hz = 0.0;  // Γ/2π
};
std::vector<GammaRow> gamma_table(const config::ExperimentConfig& base, const std::vector<int>& n_values);

struct ScalingPoint {
  int n_rods = 0;
  double p_min_w = 0.0;
  double gamma_true_hz = 0.0;
  double gamma_fit_hz = 0.0;
  double ci_low_hz = 0.0;
  double ci_high_hz = 0.0;
};

struct ScalingCampaign {
  std::vector<ScalingPoint> points;
  trap::PowerLawFit fitted;   // from the PSD fits
  trap::PowerLawFit truth;    // from the injected damping
  trap::PowerLawFit slip_corrected;    // full slip-corrected drag, for comparison
  bool in_measured_band = false;  // fitted exponent within [0.45, 0.51]
};

/// Simulated (P_min, Γ_z) scatter: Langevin motion per cluster size, Welch
/// PSD and Lorentzian fit, then a log-log slope.
ScalingCampaign scaling_campaign(const config::ExperimentConfig& base, const std::vector<int>& n_values,
                                 unsigned threads = 1);

struct RateCampaign {
  double closed_form = 0.0;
  double closed_form_err = 0.0;
  double monte_carlo = 0.0;
  double monte_carlo_err = 0.0;
  double relative_difference = 0.0;
  std::uint64_t pulses = 0;
  std::uint64_t detected = 0;
};
RateCampaign rate_campaign(const config::ExperimentConfig& base, std::uint64_t pulses, unsigned threads = 1);

struct AlignmentPoint {
  double power_w = 0.0;
  double u = 0.0;  // alignment depth over k_B·T
  double a_pi_quadrature = 0.0;
  double a_pi_sampled = 0.0;
  double a_pi_sampled_err = 0.0;
};
std::vector<AlignmentPoint> alignment_curve(const config::ExperimentConfig& base, const std::vector<double>& powers,
                                            std::size_t samples, unsigned threads = 1);

struct SampleRow {
  int n_rods = 0;
  double p_min_w = 0.0;
  double p_auger = 0.0;
  double g2 = 0.0;
  double g2_err = 0.0;
  double asymmetry_score = 0.0;
  optics::Symmetry symmetry = optics::Symmetry::inconclusive;
};
/// Per-sample g²(0) against P_min with an aperture-image symmetry class.
std::vector<SampleRow> sample_campaign(const config::ExperimentConfig& base, const std::vector<int>& n_values,
                                       unsigned threads = 1);

}  // namespace rodtrap::campaigns
