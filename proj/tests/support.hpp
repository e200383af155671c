#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "rodtrap/emitter.hpp"
#include "rodtrap/random.hpp"

namespace testing {

namespace fs = std::filesystem;

// Fresh directory under the working directory, emptied on creation.
inline fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::current_path() / "scratch" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Exact pulsed g²(0) by enumerating exciton numbers k = 0..k_max per emitter:
// Poisson excitation, exact Auger output law, then the photon-number law of
// `emitters` independent copies, renormalized for the truncated tail.
// Binomial loss leaves g²(0) unchanged.
inline double enumerated_g2(double mean_excitons, double p_auger, int emitters, int k_max = 10) {
  std::vector<double> single(static_cast<std::size_t>(k_max) + 1, 0.0);
  double pk = std::exp(-mean_excitons);
  for (int k = 0; k <= k_max; ++k) {
    if (k > 0) pk *= mean_excitons / k;
    const auto out = rodtrap::emitter::auger_output_distribution(k, p_auger);
    for (std::size_t n = 0; n < out.size(); ++n) single[n] += pk * out[n];
  }
  std::vector<double> total = {1.0};
  for (int e = 0; e < emitters; ++e) {
    std::vector<double> next(total.size() + single.size() - 1, 0.0);
    for (std::size_t i = 0; i < total.size(); ++i)
      for (std::size_t j = 0; j < single.size(); ++j) next[i + j] += total[i] * single[j];
    total = std::move(next);
  }
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t n = 0; n < total.size(); ++n) {
    m0 += total[n];
    m1 += static_cast<double>(n) * total[n];
    m2 += static_cast<double>(n) * (static_cast<double>(n) - 1.0) * total[n];
  }
  return m0 * m2 / (m1 * m1);
}

}  // namespace testing
