#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "coinv/graph.hpp"
#include "coinv/partition.hpp"

namespace oracle {

using coinv::Edge;
using coinv::WeightedGraph;

// w_ij = sum over patents containing both i and j of 1 / (n - 1).
inline std::map<std::pair<int, int>, double> projection(const std::vector<std::vector<int>>& teams, int inventors) {
  std::map<std::pair<int, int>, double> w;
  for (int i = 0; i < inventors; ++i) {
    for (int j = i + 1; j < inventors; ++j) {
      double sum = 0.0;
      for (const auto& team : teams) {
        const bool has_i = std::find(team.begin(), team.end(), i) != team.end();
        const bool has_j = std::find(team.begin(), team.end(), j) != team.end();
        if (has_i && has_j) sum += 1.0 / (static_cast<double>(team.size()) - 1.0);
      }
      if (sum > 0.0) w[{i, j}] = sum;
    }
  }
  return w;
}

inline std::vector<std::vector<double>> adjacency(const WeightedGraph& g) {
  std::vector<std::vector<double>> a(g.node_count(), std::vector<double>(g.node_count(), 0.0));
  for (const auto& e : g.edges()) a[e.u][e.v] = a[e.v][e.u] = e.weight;
  return a;
}

// Q = 1/(2m) sum_ij [A_ij - k_i k_j / (2m)] delta(c_i, c_j)
inline double modularity(const WeightedGraph& g, const std::vector<std::uint32_t>& membership) {
  const auto a = adjacency(g);
  const auto n = a.size();
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += a[i][j];
      two_m += a[i][j];
    }
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (membership[i] == membership[j]) q += a[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

// Hubert-Arabie ARI from an explicit contingency matrix.
inline double ari(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y) {
  const auto n = x.size();
  const auto rx = *std::max_element(x.begin(), x.end()) + 1;
  const auto ry = *std::max_element(y.begin(), y.end()) + 1;
  std::vector<std::vector<double>> table(rx, std::vector<double>(ry, 0.0));
  for (std::size_t i = 0; i < n; ++i) table[x[i]][y[i]] += 1.0;
  auto c2 = [](double v) { return v * (v - 1.0) / 2.0; };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < rx; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < ry; ++j) {
      sum_ij += c2(table[i][j]);
      row += table[i][j];
    }
    sum_a += c2(row);
  }
  for (std::size_t j = 0; j < ry; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < rx; ++i) col += table[i][j];
    sum_b += c2(col);
  }
  const double expected = sum_a * sum_b / c2(static_cast<double>(n));
  const double maximum = 0.5 * (sum_a + sum_b);
  return (sum_ij - expected) / (maximum - expected);
}

// Calls f on every set partition of n elements (restricted growth strings).
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::uint32_t>&)>& f) {
  std::vector<std::uint32_t> a(n, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t i, std::uint32_t used) {
    if (i == n) {
      f(a);
      return;
    }
    for (std::uint32_t c = 0; c <= used && c < n; ++c) {
      a[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  if (n == 0) {
    f(a);
    return;
  }
  a[0] = 0;
  rec(1, 1);
}

inline double best_modularity(const WeightedGraph& g) {
  double best = -1.0;
  for_each_partition(g.node_count(), [&](const auto& m) { best = std::max(best, modularity(g, m)); });
  return best;
}

// Two-level map equation from flows, in bits.
inline double map_equation(const WeightedGraph& g, const std::vector<std::uint32_t>& membership) {
  const auto a = adjacency(g);
  const auto n = a.size();
  double two_m = 0.0;
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i] += a[i][j];
  for (double v : k) two_m += v;
  const auto modules = *std::max_element(membership.begin(), membership.end()) + 1;
  std::vector<double> exit(modules, 0.0), flow(modules, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    flow[membership[i]] += k[i] / two_m;
    for (std::size_t j = 0; j < n; ++j)
      if (membership[i] != membership[j]) exit[membership[i]] += a[i][j] / two_m;
  }
  auto h = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
  double q = 0.0;
  for (double e : exit) q += e;
  double index = 0.0;
  if (q > 0.0)
    for (double e : exit) index += q * h(e / q);
  double module_codes = 0.0;
  for (std::uint32_t c = 0; c < modules; ++c) {
    const double total = exit[c] + flow[c];
    double hc = h(exit[c] / total);
    for (std::size_t i = 0; i < n; ++i)
      if (membership[i] == c) hc += h((k[i] / two_m) / total);
    module_codes += total * hc;
  }
  return index + module_codes;
}

// Bin of x: the k with k*w - w/2 <= x < k*w + w/2, found by scanning.
inline std::map<long, std::size_t> binning(const std::vector<double>& lags, double w) {
  std::map<long, std::size_t> out;
  for (double x : lags) {
    for (long k = -2000; k <= 2000; ++k) {
      if (x >= k * w - w / 2 && x < k * w + w / 2) {
        ++out[k];
        break;
      }
    }
  }
  return out;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : all) {
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / a.size();
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

// 5% critical value of the two-sample KS statistic.
inline double ks_critical(std::size_t n, std::size_t m) {
  return 1.358 * std::sqrt(static_cast<double>(n + m) / static_cast<double>(n * m));
}

struct Welch {
  double t, df;
};

inline Welch welch(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / x.size();
  };
  auto var = [&](const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / (x.size() - 1.0);
  };
  const double sa = var(a) / a.size(), sb = var(b) / b.size();
  const double t = (mean(a) - mean(b)) / std::sqrt(sa + sb);
  const double df = (sa + sb) * (sa + sb) / (sa * sa / (a.size() - 1.0) + sb * sb / (b.size() - 1.0));
  return {t, df};
}

inline WeightedGraph random_graph(std::size_t n, double p, std::mt19937_64& rng, bool integer_weights = false) {
  std::bernoulli_distribution coin(p);
  std::uniform_real_distribution<double> weight(0.1, 3.0);
  std::uniform_int_distribution<int> iweight(1, 3);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng))
        edges.push_back({static_cast<coinv::NodeIndex>(i), static_cast<coinv::NodeIndex>(j),
                         integer_weights ? static_cast<double>(iweight(rng)) : weight(rng)});
  return WeightedGraph::indexed(n, std::move(edges));
}

inline bool connected(const WeightedGraph& g) { return coinv::connected_components(g).count() <= 1; }

inline WeightedGraph random_connected_graph(std::size_t n, double p, std::mt19937_64& rng) {
  while (true) {
    auto g = random_graph(n, p, rng);
    if (g.edge_count() > 0 && connected(g)) return g;
  }
}

// Stochastic block model with unit weights; labels[i] is i's block.
inline WeightedGraph planted_graph(const std::vector<std::size_t>& sizes, double p_in, double p_out,
                                   std::uint64_t seed, std::vector<std::uint32_t>& labels) {
  std::mt19937_64 rng(seed);
  labels.clear();
  for (std::size_t c = 0; c < sizes.size(); ++c) labels.insert(labels.end(), sizes[c], static_cast<std::uint32_t>(c));
  const auto n = labels.size();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(rng) < (labels[i] == labels[j] ? p_in : p_out))
        edges.push_back({static_cast<coinv::NodeIndex>(i), static_cast<coinv::NodeIndex>(j), 1.0});
  return WeightedGraph::indexed(n, std::move(edges));
}

// k cliques of size s joined in a ring by single unit edges.
inline WeightedGraph ring_of_cliques(std::size_t k, std::size_t s) {
  std::vector<Edge> edges;
  auto id = [&](std::size_t c, std::size_t i) { return static_cast<coinv::NodeIndex>(c * s + i); };
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = i + 1; j < s; ++j) edges.push_back({id(c, i), id(c, j), 1.0});
    if (k > 1 && !(k == 2 && c == 1)) edges.push_back({id(c, s - 1), id((c + 1) % k, 0), 1.0});
  }
  return WeightedGraph::indexed(k * s, std::move(edges));
}

// Number of planted blocks reproduced exactly as a community.
inline std::size_t exact_blocks(const coinv::Partition& p, std::size_t k, std::size_t s) {
  std::size_t hits = 0;
  const auto sizes = p.community_sizes();
  for (std::size_t c = 0; c < k; ++c) {
    const auto label = p.membership[c * s];
    bool same = true;
    for (std::size_t i = 1; i < s; ++i) same = same && p.membership[c * s + i] == label;
    if (same && sizes[label] == s) ++hits;
  }
  return hits;
}

}  // namespace oracle

namespace testing_support {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("coinv_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
