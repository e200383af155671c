#include <algorithm>
#include <cmath>

#include "rodtrap/analysis.hpp"
#include "rodtrap/error.hpp"

namespace rodtrap::analysis {

G2Result g2_zero(const emitter::TimeTagStream& stream, double pulse_period, int max_lag) {
  stream.validate();
  if (!(pulse_period > 0.0)) throw InvalidArgument("pulse period must be positive");
  if (max_lag < 1) throw InvalidArgument("max lag must be at least one pulse");

  std::vector<std::int64_t> a, b;
  for (const auto& ev : stream.events) {
    const auto idx = static_cast<std::int64_t>(std::llround(ev.time / pulse_period));
    (ev.channel == 0 ? a : b).push_back(idx);
  }
  if (a.empty() || b.empty()) throw UndefinedResult("g2 needs events on both channels");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  G2Result res;
  const std::size_t nlags = 2 * static_cast<std::size_t>(max_lag) + 1;
  res.coincidences.assign(nlags, 0);
  res.lags.resize(nlags);
  for (std::size_t i = 0; i < nlags; ++i) res.lags[i] = static_cast<int>(i) - max_lag;

  std::size_t lo = 0;
  for (const std::int64_t ia : a) {
    while (lo < b.size() && b[lo] < ia - max_lag) ++lo;
    for (std::size_t j = lo; j < b.size() && b[j] <= ia + max_lag; ++j)
      ++res.coincidences[static_cast<std::size_t>(b[j] - ia + max_lag)];
  }

  res.zero_lag = res.coincidences[static_cast<std::size_t>(max_lag)];
  for (std::size_t i = 0; i < nlags; ++i)
    if (i != static_cast<std::size_t>(max_lag)) res.side_total += res.coincidences[i];
  if (res.side_total == 0) throw UndefinedResult("no side-peak coincidences; g2 is undefined");
  res.side_mean = static_cast<double>(res.side_total) / static_cast<double>(2 * max_lag);

  const double n0 = static_cast<double>(res.zero_lag);
  res.g2_zero = n0 / res.side_mean;
  const double zero_term = std::sqrt(std::max(n0, 1.0)) / res.side_mean;
  const double side_term = res.g2_zero / std::sqrt(static_cast<double>(res.side_total));
  res.error = std::hypot(zero_term, side_term);

  if (stream.events.size() < 10000) res.warnings.emplace_back("fewer than 10^4 events; g2 is statistically weak");
  if (res.zero_lag == 0) res.warnings.emplace_back("no zero-lag coincidences; error uses one count");
  return res;
}

}  // namespace rodtrap::analysis
