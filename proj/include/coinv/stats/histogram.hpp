#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coinv/error.hpp"
#include "coinv/graph_io.hpp"

namespace coinv {

// Fixed-width histogram of lags in months. Bin k is centered at k * width and
// covers [k*w - w/2, k*w + w/2), so one bin is centered at zero. Bins may be
// marked removed (for example the zero-lag peak); removed bins carry no count
// and are skipped by fits.
struct LagHistogram {
  double bin_width = 2.0;
  std::int64_t first_bin = 0;  // index of counts[0]
  std::vector<std::size_t> counts;
  std::vector<bool> removed;
  std::size_t total = 0;

  std::size_t size() const { return counts.size(); }
  double center(std::size_t i) const { return static_cast<double>(first_bin + static_cast<std::int64_t>(i)) * bin_width; }
  double lower(std::size_t i) const { return center(i) - 0.5 * bin_width; }
  double upper(std::size_t i) const { return center(i) + 0.5 * bin_width; }

  // Position of the bin with index k, or -1 when outside the range.
  std::ptrdiff_t position(std::int64_t k) const {
    const auto pos = k - first_bin;
    return (pos >= 0 && pos < static_cast<std::int64_t>(counts.size())) ? static_cast<std::ptrdiff_t>(pos) : -1;
  }
};

inline std::int64_t bin_index(double lag, double bin_width) {
  return static_cast<std::int64_t>(std::floor((lag + 0.5 * bin_width) / bin_width));
}

inline LagHistogram histogram(std::span<const double> lags, double bin_width = 2.0) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
  LagHistogram h;
  h.bin_width = bin_width;
  if (lags.empty()) return h;
  std::int64_t lo = bin_index(lags[0], bin_width), hi = lo;
  for (double x : lags) {
    const auto k = bin_index(x, bin_width);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  h.first_bin = lo;
  h.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  h.removed.assign(h.counts.size(), false);
  for (double x : lags) ++h.counts[static_cast<std::size_t>(bin_index(x, bin_width) - lo)];
  h.total = lags.size();
  return h;
}

enum class ZeroPeakMode { interpolate, remove };

// Replaces (interpolate) or drops (remove) the zero-centered bin. Interpolate
// sets it to the rounded mean of the two neighbouring bins.
inline LagHistogram adjust_zero_peak(const LagHistogram& hist, ZeroPeakMode mode) {
  const auto zero = hist.position(0);
  const auto below = hist.position(-1);
  const auto above = hist.position(1);
  if (zero < 0 || below < 0 || above < 0 || hist.removed[zero] || hist.removed[below] || hist.removed[above])
    throw MissingBins("zero-peak adjustment needs bins centered at 0 and +/- one bin width");
  LagHistogram out = hist;
  out.total -= hist.counts[zero];
  if (mode == ZeroPeakMode::interpolate) {
    const double mean = 0.5 * static_cast<double>(hist.counts[below] + hist.counts[above]);
    out.counts[zero] = static_cast<std::size_t>(std::llround(mean));
    out.total += out.counts[zero];
  } else {
    out.counts[zero] = 0;
    out.removed[zero] = true;
  }
  return out;
}

// `bin_center,count,probability`; removed bins are omitted.
inline void write_histogram_csv(const std::string& path, const LagHistogram& h) {
  auto out = detail::open_for_write(path);
  out << "bin_center,count,probability\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h.removed[i]) continue;
    const double p = h.total ? static_cast<double>(h.counts[i]) / static_cast<double>(h.total) : 0.0;
    out << format_real(h.center(i)) << ',' << h.counts[i] << ',' << format_real(p) << '\n';
  }
}

}  // namespace coinv
