#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "rodtrap/analysis.hpp"
#include "rodtrap/error.hpp"

namespace rodtrap::analysis {

namespace {

// FFTW's planner is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void execute() { fftw_execute(plan_); }
  [[nodiscard]] double power(std::size_t k) const { return out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1]; }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

void Spectrum::validate() const {
  if (frequency.size() != density.size() || frequency.empty()) throw InvalidArgument("malformed spectrum");
  for (double d : density)
    if (!(d >= 0.0)) throw InvalidArgument("spectral densities must be non-negative");
}

double Spectrum::integral() const {
  double s = 0.0;
  for (double d : density) s += d;
  return s * resolution_bandwidth;
}

Spectrum power_spectral_density(const langevin::TimeSeries& series, std::size_t segment_length,
                                std::size_t overlap) {
  series.validate();
  if (segment_length < 8 || overlap >= segment_length)
    throw InvalidArgument("segment length must be ≥ 8 and exceed the overlap");
  const std::size_t step = segment_length - overlap;
  const std::size_t n = series.samples.size();
  if (n < segment_length + 3 * step) throw InsufficientData("series shorter than four segments");

  const double fs = 1.0 / series.sample_interval;
  std::vector<double> window(segment_length);
  double wsum2 = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < segment_length; ++i) {
    // Periodic Hann.
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(segment_length));
    wsum2 += window[i] * window[i];
    wsum += window[i];
  }

  RealFft fft(segment_length);
  const std::size_t bins = segment_length / 2 + 1;
  std::vector<double> acc(bins, 0.0);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + segment_length <= n; start += step) {
    double mean = 0.0;
    for (std::size_t i = 0; i < segment_length; ++i) mean += series.samples[start + i];
    mean /= static_cast<double>(segment_length);
    double* in = fft.input();
    for (std::size_t i = 0; i < segment_length; ++i) in[i] = (series.samples[start + i] - mean) * window[i];
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k) acc[k] += fft.power(k);
    ++segments;
  }

  Spectrum s;
  s.averages = segments;
  s.resolution_bandwidth = fs / static_cast<double>(segment_length);
  s.enbw = fs * wsum2 / (wsum * wsum);
  s.frequency.resize(bins);
  s.density.resize(bins);
  const double scale = 1.0 / (fs * wsum2 * static_cast<double>(segments));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (segment_length % 2 == 0 && k == bins - 1);
    s.frequency[k] = static_cast<double>(k) * s.resolution_bandwidth;
    s.density[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
  }
  return s;
}

}  // namespace rodtrap::analysis
