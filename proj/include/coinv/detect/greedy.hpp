#pragma once

#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "coinv/partition.hpp"

namespace coinv {

// Receives the modularity change of every merge or move a detector applies.
using StepObserver = std::function<void(double delta_q)>;

// Agglomerative modularity maximization (Clauset-Newman-Moore) on weighted
// graphs. Starting from singletons, the adjacent pair with the largest
// modularity gain is merged until no merge increases modularity. Ties go to
// the lowest (i, j) community-id pair; the merged community keeps the lower id.
inline Partition detect_greedy(const WeightedGraph& graph, std::uint64_t seed = 0,
                               const StepObserver& observer = {}) {
  const auto n = graph.node_count();
  if (n == 0) throw EmptyGraph("greedy: graph has no nodes");
  Partition result;
  const double m = graph.total_weight();
  if (!(m > 0.0)) {
    result = Partition::singletons(n);
  } else {
    struct Link {
      double weight;
      double gain;
    };
    std::vector<std::map<CommunityId, Link>> links(n);
    std::vector<double> degree(n);
    std::vector<CommunityId> parent(n);
    for (NodeIndex i = 0; i < n; ++i) {
      degree[i] = graph.strength(i);
      parent[i] = i;
    }
    auto gain_of = [&](double w, CommunityId i, CommunityId j) {
      return w / m - degree[i] * degree[j] / (2.0 * m * m);
    };
    // Ordered by descending gain, then ascending (i, j).
    using Entry = std::tuple<double, CommunityId, CommunityId>;
    auto cmp = [](const Entry& a, const Entry& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    };
    std::set<Entry, decltype(cmp)> heap(cmp);
    auto key = [](double g, CommunityId a, CommunityId b) {
      return a < b ? Entry{g, a, b} : Entry{g, b, a};
    };
    for (const auto& e : graph.edges()) {
      const double g = gain_of(e.weight, e.u, e.v);
      links[e.u][e.v] = {e.weight, g};
      links[e.v][e.u] = {e.weight, g};
      heap.insert(key(g, e.u, e.v));
    }

    while (!heap.empty()) {
      auto [g, keep, gone] = *heap.begin();
      if (!(g > 0.0)) break;
      if (observer) observer(g);

      // Drop every entry touching either community; they are recomputed below.
      for (const auto& [k, l] : links[keep]) heap.erase(key(l.gain, keep, k));
      for (const auto& [k, l] : links[gone]) {
        if (k != keep) heap.erase(key(l.gain, gone, k));
      }
      auto absorbed = std::move(links[gone]);
      links[gone].clear();
      links[keep].erase(gone);
      absorbed.erase(keep);
      for (const auto& [k, l] : absorbed) {
        links[k].erase(gone);
        links[keep][k].weight += l.weight;
      }
      degree[keep] += degree[gone];
      parent[gone] = keep;
      for (auto& [k, l] : links[keep]) {
        l.gain = gain_of(l.weight, keep, k);
        links[k][keep] = l;
        heap.insert(key(l.gain, keep, k));
      }
    }

    std::vector<CommunityId> root(n);
    for (NodeIndex i = 0; i < n; ++i) {
      CommunityId r = i;
      while (parent[r] != r) r = parent[r];
      root[i] = r;
    }
    result = Partition::from_labels(root);
  }
  result.algorithm = "greedy";
  result.seed = seed;
  return result;
}

}  // namespace coinv
