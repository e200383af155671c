#pragma once

// Measurement pipeline: motional spectra, photon correlations, blinking
// histograms and saturation curves.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rodtrap/emitter.hpp"
#include "rodtrap/langevin.hpp"

namespace rodtrap::analysis {

// ---------------------------------------------------------------------------
// Power spectral density

struct Spectrum {
  std::vector<double> frequency;  // Hz, uniform grid from 0
  std::vector<double> density;    // one-sided, units²/Hz
  double resolution_bandwidth = 0.0;  // Hz, frequency bin spacing
  double enbw = 0.0;                  // equivalent noise bandwidth of the window, Hz
  std::size_t averages = 0;
  std::string window = "hann";

  void validate() const;
  /// ∫ density df by the rectangle rule on the bin grid.
  [[nodiscard]] double integral() const;
};

/// Welch averaged periodogram: Hann-windowed segments with the given overlap
/// (in samples), each segment mean removed, one-sided density scaling.
Spectrum power_spectral_density(const langevin::TimeSeries& series, std::size_t segment_length,
                                std::size_t overlap);

// ---------------------------------------------------------------------------
// Lorentzian peak fit: L(f) = A·h²/((f − f0)² + h²) + B, h = Γ/4π, so the
// reported full width in Hz is Γ/2π with Γ the damping rate in rad/s.

struct LorentzianFit {
  double f0 = 0.0;          // Hz
  double width_hz = 0.0;    // Γ/2π (FWHM)
  double gamma = 0.0;       // Γ, rad/s
  double amplitude = 0.0;
  double background = 0.0;
  double width_ci_low = 0.0;   // 95 % confidence interval on width_hz
  double width_ci_high = 0.0;
  double snr = 0.0;
  int iterations = 0;
  double residual_norm = 0.0;
};

struct LorentzianOptions {
  double min_snr = 3.0;
  double window_halfwidths = 12.0;  // fit range f0 ± this many half-widths
  double f_min = 0.0;               // search band for the peak
  double f_max = 0.0;               // ≤ 0 means up to Nyquist
  int max_iterations = 200;
};

LorentzianFit fit_lorentzian(const Spectrum& spectrum, const LorentzianOptions& opts = {});

/// L(f) for a fitted or injected parameter set.
double lorentzian(double f, double amplitude, double f0, double width_hz, double background);

// ---------------------------------------------------------------------------
// Pulsed g²(0)

struct G2Result {
  double g2_zero = 0.0;
  double error = 0.0;
  std::vector<int> lags;                      // pulse lags −max..max
  std::vector<std::uint64_t> coincidences;    // per lag, channel 0 → channel 1
  std::uint64_t zero_lag = 0;
  std::uint64_t side_total = 0;
  double side_mean = 0.0;
  std::vector<std::string> warnings;
};

G2Result g2_zero(const emitter::TimeTagStream& stream, double pulse_period, int max_lag = 50);

// ---------------------------------------------------------------------------
// Blinking

enum class BlinkClass { grey_state_peak, exponential_burst, two_state };
std::string to_string(BlinkClass c);

struct BlinkOptions {
  double burst_r2 = 0.95;         // log-linear fit quality for the burst class
  double peak_prominence = 3.0;   // in Poisson σ of the histogram bin
  std::size_t min_bins = 1000;
};

struct BlinkHistogram {
  double bin_width = 500e-6;  // s, time bin
  double count_step = 1.0;    // counts per histogram bin
  std::vector<double> rate_edges;            // counts per time bin, lower edges
  std::vector<std::uint64_t> histogram;
  std::vector<std::uint64_t> trace;          // counts per time bin
  BlinkClass classification = BlinkClass::grey_state_peak;
  double burst_r2 = 0.0;
  std::vector<double> peak_means;  // counts per time bin, ascending
  double grey_mean = 0.0;          // counts per time bin
  double grey_rms = 0.0;
  double grey_rate = 0.0;          // 1/s
  double grey_rate_rms = 0.0;
};

BlinkHistogram blink_analysis(const emitter::TimeTagStream& stream, double bin_width = 500e-6,
                              const BlinkOptions& opts = {});

// ---------------------------------------------------------------------------
// Saturation curve: rate = C·(1 − exp(−P/P_sat))

struct SaturationFit {
  double p_sat = 0.0;
  double p_sat_err = 0.0;
  double amplitude = 0.0;
  double amplitude_err = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

SaturationFit fit_saturation(const std::vector<std::pair<double, double>>& power_rate);

// ---------------------------------------------------------------------------
// Gaussian peak used by the blink classifier.

struct GaussianFit {
  double amplitude = 0.0;
  double mean = 0.0;
  double sigma = 0.0;
};

GaussianFit fit_gaussian(const std::vector<double>& x, const std::vector<double>& y, GaussianFit start);

}  // namespace rodtrap::analysis
