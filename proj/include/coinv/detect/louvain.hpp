#pragma once

#include <numeric>
#include <random>
#include <vector>

#include "coinv/detect/greedy.hpp"
#include "coinv/detect/level_graph.hpp"

namespace coinv {

struct LouvainOptions {
  // Minimum modularity gain for a move to be applied.
  double min_gain = 1e-12;
  std::size_t max_sweeps_per_level = 1000;
};

// Louvain modularity optimization: local moves of single nodes in a seeded
// random order, then aggregation of communities into nodes, repeated until a
// level produces no move.
inline Partition detect_louvain(const WeightedGraph& graph, std::uint64_t seed,
                                const StepObserver& observer = {},
                                const LouvainOptions& options = {}) {
  const auto n = graph.node_count();
  if (n == 0) throw EmptyGraph("louvain: graph has no nodes");
  const double m = graph.total_weight();
  Partition result;
  if (!(m > 0.0)) {
    result = Partition::singletons(n);
    result.algorithm = "louvain";
    result.seed = seed;
    return result;
  }

  std::mt19937_64 rng(seed);
  auto level = detail::LevelGraph::from(graph);
  std::vector<CommunityId> node_to_community(n);
  std::iota(node_to_community.begin(), node_to_community.end(), CommunityId{0});
  std::size_t levels = 0;

  while (true) {
    const auto size = level.size();
    std::vector<CommunityId> community(size);
    std::iota(community.begin(), community.end(), CommunityId{0});
    std::vector<double> total(level.strength);
    std::vector<NodeIndex> order(size);
    std::iota(order.begin(), order.end(), NodeIndex{0});
    std::vector<double> link_to(size, 0.0);
    std::vector<CommunityId> touched;

    bool moved_any = false;
    for (std::size_t sweep = 0; sweep < options.max_sweeps_per_level; ++sweep) {
      std::shuffle(order.begin(), order.end(), rng);
      bool moved = false;
      for (auto i : order) {
        const auto home = community[i];
        const double k = level.strength[i];
        for (const auto& nb : level.adj[i]) {
          const auto c = community[nb.node];
          if (link_to[c] == 0.0) touched.push_back(c);
          link_to[c] += nb.weight;
        }
        total[home] -= k;
        auto gain = [&](CommunityId c) { return link_to[c] / m - total[c] * k / (2.0 * m * m); };
        const double stay = gain(home);
        CommunityId best = home;
        double best_gain = stay;
        for (auto c : touched) {
          const double g = gain(c);
          if (g > best_gain) {
            best_gain = g;
            best = c;
          }
        }
        if (best != home && best_gain - stay > options.min_gain) {
          if (observer) observer(best_gain - stay);
          community[i] = best;
          moved = true;
        }
        total[community[i]] += k;
        for (auto c : touched) link_to[c] = 0.0;
        link_to[home] = 0.0;
        touched.clear();
      }
      if (!moved) break;
      moved_any = true;
    }
    if (!moved_any) break;

    auto dense = Partition::from_labels(community);
    for (auto& c : node_to_community) c = dense.membership[c];
    level = level.aggregate(dense.membership, dense.community_count);
    ++levels;
  }

  result = Partition::from_labels(node_to_community);
  result.algorithm = "louvain";
  result.seed = seed;
  result.metadata["levels"] = levels;
  return result;
}

}  // namespace coinv
