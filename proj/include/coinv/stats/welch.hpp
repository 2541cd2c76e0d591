#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "coinv/error.hpp"

namespace coinv {

struct WelchResult {
  double t = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  double shift = 0.0;  // constant added before the log transform, if any
};

// Two-sided tail probability P(|T| >= |t|) for Student's t with `df`.
inline double student_t_two_sided(double t, double df) {
  if (t == 0.0) return 1.0;
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0, 1.0);
}

inline double student_t_cdf(double t, double df) {
  return boost::math::cdf(boost::math::students_t(df), t);
}

namespace detail {
struct Moments {
  double n, mean, var;
};
inline Moments moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {n, mean, ss / (n - 1.0)};
}
}  // namespace detail

// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
inline WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw SampleTooSmall("welch_t needs at least 2 values per sample");
  const auto ma = detail::moments(a), mb = detail::moments(b);
  const double va = ma.var / ma.n, vb = mb.var / mb.n;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) throw DegenerateSample("both samples have zero variance");
  WelchResult r;
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  r.degrees_of_freedom = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  r.p_value = student_t_two_sided(r.t, r.degrees_of_freedom);
  return r;
}

// Welch test on ln(x + c) with c = 1 - min(a, b), so every value maps to >= 0.
inline WelchResult log_shift_welch(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw SampleTooSmall("log_shift_welch needs nonempty samples");
  const double lowest = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  const double c = 1.0 - lowest;
  auto transform = [c](std::span<const double> x) {
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [c](double v) { return std::log(v + c); });
    return out;
  };
  const auto la = transform(a), lb = transform(b);
  auto r = welch_t(la, lb);
  r.shift = c;
  return r;
}

struct SubsampleResult {
  double mean_t = 0.0;
  double fraction_significant = 0.0;
  std::vector<double> t_values;  // per repetition
};

// Repeated Welch tests on random subsamples of size k drawn without
// replacement from each sample. Repetition r uses its own generator seeded
// with seed + r, so the result does not depend on `workers`.
inline SubsampleResult subsample_welch(std::span<const double> a, std::span<const double> b, std::size_t k = 300,
                                       std::size_t reps = 500, double alpha = 0.05, std::uint64_t seed = 0,
                                       unsigned workers = 1) {
  if (a.size() < k || b.size() < k) throw SampleTooSmall("subsample size exceeds a sample");
  if (k < 2) throw SampleTooSmall("subsample size must be at least 2");
  SubsampleResult out;
  out.t_values.assign(reps, 0.0);
  std::vector<char> significant(reps, 0);

  auto run = [&](std::size_t begin, std::size_t end) {
    std::vector<double> sa(k), sb(k);
    for (std::size_t r = begin; r < end; ++r) {
      std::mt19937_64 rng(seed + r);
      std::sample(a.begin(), a.end(), sa.begin(), k, rng);
      std::sample(b.begin(), b.end(), sb.begin(), k, rng);
      const auto w = welch_t(sa, sb);
      out.t_values[r] = w.t;
      significant[r] = w.p_value < alpha;
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(reps, 1))));
  if (workers == 1) {
    run(0, reps);
  } else {
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (reps + workers - 1) / workers;
    for (std::size_t s = 0; s < reps; s += chunk)
      jobs.push_back(std::async(std::launch::async, run, s, std::min(reps, s + chunk)));
    for (auto& j : jobs) j.get();
  }
  if (reps > 0) {
    out.mean_t = std::accumulate(out.t_values.begin(), out.t_values.end(), 0.0) / static_cast<double>(reps);
    out.fraction_significant =
        static_cast<double>(std::count(significant.begin(), significant.end(), 1)) / static_cast<double>(reps);
  }
  return out;
}

}  // namespace coinv
