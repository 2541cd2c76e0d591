#pragma once

#include <cmath>
#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "coinv/partition.hpp"

namespace coinv {

struct WalktrapOptions {
  std::size_t steps = 4;  // random-walk length t
};

namespace detail {

// Sparse vector sorted by index.
using SparseVec = std::vector<std::pair<NodeIndex, double>>;

inline double squared_distance(const SparseVec& a, const SparseVec& b) {
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      d += a[i].second * a[i].second;
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      d += b[j].second * b[j].second;
      ++j;
    } else {
      const double x = a[i].second - b[j].second;
      d += x * x;
      ++i;
      ++j;
    }
  }
  return d;
}

inline SparseVec weighted_mean(const SparseVec& a, double wa, const SparseVec& b, double wb) {
  SparseVec out;
  out.reserve(a.size() + b.size());
  const double total = wa + wb;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.emplace_back(a[i].first, a[i].second * wa / total);
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, b[j].second * wb / total);
      ++j;
    } else {
      out.emplace_back(a[i].first, (a[i].second * wa + b[j].second * wb) / total);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace detail

// Walktrap (Pons-Latapy): communities are compared through the distributions
// of t-step random walks started from them, and adjacent communities are
// merged in Ward order (minimal increase of the mean squared walk distance).
// Each vertex receives a self-loop weighted by its mean incident edge weight.
// The dendrogram is cut at the level of maximal modularity, measured on the
// input graph.
inline Partition detect_random_walks(const WeightedGraph& graph, std::uint64_t seed = 0,
                                     const WalktrapOptions& options = {}) {
  const auto n = graph.node_count();
  if (n == 0) throw EmptyGraph("walktrap: graph has no nodes");
  if (options.steps == 0) throw std::invalid_argument("walktrap: steps must be positive");
  if (connected_components(graph).count() > 1)
    throw Disconnected("walktrap: input graph is disconnected; run per component");
  const double m = graph.total_weight();
  auto finish = [&](Partition p) {
    p.algorithm = "walktrap";
    p.seed = seed;
    p.metadata["steps"] = options.steps;
    return p;
  };
  if (!(m > 0.0)) return finish(Partition::singletons(n));

  std::vector<double> loop(n), degree(n);
  for (NodeIndex i = 0; i < n; ++i) {
    const auto nb = graph.neighbors(i);
    loop[i] = nb.empty() ? 1.0 : graph.strength(i) / static_cast<double>(nb.size());
    degree[i] = graph.strength(i) + loop[i];
  }

  // P^t_i scaled by D^{-1/2}, so Walktrap's distance is plain Euclidean.
  std::vector<double> acc(n, 0.0);
  std::vector<NodeIndex> touched;
  auto walk_from = [&](NodeIndex start) {
    detail::SparseVec cur{{start, 1.0}};
    for (std::size_t step = 0; step < options.steps; ++step) {
      for (const auto& [j, p] : cur) {
        const double out = p / degree[j];
        if (acc[j] == 0.0) touched.push_back(j);
        acc[j] += out * loop[j];
        for (const auto& nb : graph.neighbors(j)) {
          if (acc[nb.node] == 0.0) touched.push_back(nb.node);
          acc[nb.node] += out * nb.weight;
        }
      }
      std::sort(touched.begin(), touched.end());
      cur.clear();
      for (auto k : touched) {
        cur.emplace_back(k, acc[k]);
        acc[k] = 0.0;
      }
      touched.clear();
    }
    for (auto& [k, p] : cur) p /= std::sqrt(degree[k]);
    return cur;
  };

  struct Link {
    double delta;
    double weight;
  };
  struct Community {
    double size = 0.0;
    double strength = 0.0;
    detail::SparseVec walk;
    std::map<CommunityId, Link> links;
  };
  std::vector<Community> comm(2 * n);
  const double inv_n = 1.0 / static_cast<double>(n);
  auto ward = [&](const Community& a, const Community& b) {
    return inv_n * a.size * b.size / (a.size + b.size) * detail::squared_distance(a.walk, b.walk);
  };

  using Entry = std::tuple<double, CommunityId, CommunityId>;
  std::set<Entry> heap;
  for (NodeIndex i = 0; i < n; ++i) {
    comm[i].size = 1.0;
    comm[i].strength = graph.strength(i);
    comm[i].walk = walk_from(i);
  }
  for (const auto& e : graph.edges()) {
    const double d = ward(comm[e.u], comm[e.v]);
    comm[e.u].links[e.v] = {d, e.weight};
    comm[e.v].links[e.u] = {d, e.weight};
    heap.emplace(d, e.u, e.v);
  }

  double q = 0.0;
  for (NodeIndex i = 0; i < n; ++i) q -= std::pow(graph.strength(i) / (2.0 * m), 2);
  double best_q = q;
  std::size_t best_step = 0;
  std::vector<std::pair<CommunityId, CommunityId>> merges;
  CommunityId next = static_cast<CommunityId>(n);

  while (!heap.empty()) {
    auto [delta, c1, c2] = *heap.begin();
    auto& a = comm[c1];
    auto& b = comm[c2];
    const double w12 = a.links.at(c2).weight;
    q += w12 / m - a.strength * b.strength / (2.0 * m * m);
    merges.emplace_back(c1, c2);
    if (q > best_q) {
      best_q = q;
      best_step = merges.size();
    }

    const CommunityId c3 = next++;
    auto& c = comm[c3];
    c.size = a.size + b.size;
    c.strength = a.strength + b.strength;
    c.walk = detail::weighted_mean(a.walk, a.size, b.walk, b.size);

    for (const auto& [k, l] : a.links) heap.erase({l.delta, std::min(c1, k), std::max(c1, k)});
    for (const auto& [k, l] : b.links)
      if (k != c1) heap.erase({l.delta, std::min(c2, k), std::max(c2, k)});

    std::map<CommunityId, Link> merged;
    for (const auto& [k, l] : a.links) {
      if (k == c2) continue;
      auto it = b.links.find(k);
      const auto& other = comm[k];
      if (it != b.links.end()) {
        const double d = ((a.size + other.size) * l.delta + (b.size + other.size) * it->second.delta -
                          other.size * delta) /
                         (a.size + b.size + other.size);
        merged[k] = {d, l.weight + it->second.weight};
      } else {
        merged[k] = {ward(c, other), l.weight};
      }
    }
    for (const auto& [k, l] : b.links) {
      if (k == c1 || merged.contains(k)) continue;
      merged[k] = {ward(c, comm[k]), l.weight};
    }
    for (const auto& [k, l] : merged) {
      auto& other = comm[k];
      other.links.erase(c1);
      other.links.erase(c2);
      other.links[c3] = l;
      heap.emplace(l.delta, k, c3);
    }
    c.links = std::move(merged);
    a = Community{};
    b = Community{};
  }

  std::vector<CommunityId> parent(next);
  std::iota(parent.begin(), parent.end(), CommunityId{0});
  for (std::size_t s = 0; s < best_step; ++s) {
    parent[merges[s].first] = static_cast<CommunityId>(n + s);
    parent[merges[s].second] = static_cast<CommunityId>(n + s);
  }
  std::vector<CommunityId> root(n);
  for (NodeIndex i = 0; i < n; ++i) {
    CommunityId r = i;
    while (parent[r] != r) r = parent[r];
    root[i] = r;
  }
  auto result = finish(Partition::from_labels(root));
  result.metadata["best_modularity"] = best_q;
  return result;
}

}  // namespace coinv
