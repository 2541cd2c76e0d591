#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "coinv/stats/histogram.hpp"

namespace coinv {

struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  double mode = 0.0;
  // Standard errors, present for fit-derived statistics.
  std::optional<double> mean_error;
  std::optional<double> median_error;
  std::optional<double> mode_error;
};

// Center of the highest-count bin; the lowest such bin on ties.
inline double histogram_mode(const LagHistogram& h) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h.removed[i]) continue;
    if (!best || h.counts[i] > h.counts[*best]) best = i;
  }
  if (!best) throw EmptySample("mode of an empty histogram");
  return h.center(*best);
}

// Arithmetic mean of the raw lags, median of the lags rounded to whole months,
// and the modal bin center at the given bin width.
inline SummaryStats raw_summary(std::span<const double> lags, double bin_width = 2.0) {
  if (lags.empty()) throw EmptySample("raw summary of an empty sample");
  SummaryStats s;
  s.mean = std::accumulate(lags.begin(), lags.end(), 0.0) / static_cast<double>(lags.size());
  std::vector<double> rounded(lags.size());
  std::transform(lags.begin(), lags.end(), rounded.begin(), [](double x) { return std::round(x); });
  std::sort(rounded.begin(), rounded.end());
  const auto n = rounded.size();
  s.median = n % 2 ? rounded[n / 2] : 0.5 * (rounded[n / 2 - 1] + rounded[n / 2]);
  s.mode = histogram_mode(histogram(lags, bin_width));
  return s;
}

}  // namespace coinv
