#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "coinv/detect/level_graph.hpp"
#include "coinv/partition.hpp"

namespace coinv {

namespace detail {
inline double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }
}  // namespace detail

// Two-level map equation, in bits, for the random walk whose stationary
// distribution is proportional to weighted degree:
//   L = q log q - 2 sum q_i log q_i - sum p_a log p_a + sum (q_i + p_i) log(q_i + p_i)
// with q_i the exit flow and p_i the visit rate of module i.
inline double map_equation(const WeightedGraph& graph, const Partition& partition) {
  if (partition.size() != graph.node_count()) throw NodeSetMismatch("partition/graph size mismatch");
  const double two_m = 2.0 * graph.total_weight();
  if (!(two_m > 0.0)) throw EmptyGraph("map equation undefined without edges");
  std::vector<double> exit(partition.community_count, 0.0), visit(partition.community_count, 0.0);
  double node_term = 0.0;
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    const double p = graph.strength(i) / two_m;
    visit[partition.membership[i]] += p;
    node_term += detail::plogp(p);
  }
  for (const auto& e : graph.edges()) {
    const auto a = partition.membership[e.u], b = partition.membership[e.v];
    if (a != b) {
      exit[a] += e.weight / two_m;
      exit[b] += e.weight / two_m;
    }
  }
  double total_exit = 0.0, exit_term = 0.0, module_term = 0.0;
  for (CommunityId c = 0; c < partition.community_count; ++c) {
    total_exit += exit[c];
    exit_term += detail::plogp(exit[c]);
    module_term += detail::plogp(exit[c] + visit[c]);
  }
  return detail::plogp(total_exit) - 2.0 * exit_term - node_term + module_term;
}

struct InfomapOptions {
  std::size_t trials = 1;
  double min_improvement = 1e-10;  // bits
  std::size_t max_sweeps_per_level = 1000;
};

// Receives the codelength after every applied move.
using CodelengthObserver = std::function<void(double codelength)>;

// Minimizes the two-level map equation with Louvain-style greedy moves and
// aggregation. If the single-module solution codes at least as well, that
// solution is returned. `metadata["codelength"]` holds the final value.
inline Partition detect_infomap(const WeightedGraph& graph, std::uint64_t seed,
                                const InfomapOptions& options = {},
                                const CodelengthObserver& observer = {}) {
  const auto n = graph.node_count();
  if (n == 0) throw EmptyGraph("infomap: graph has no nodes");
  if (connected_components(graph).count() > 1)
    throw Disconnected("infomap: input graph is disconnected; run per component");
  const double two_m = 2.0 * graph.total_weight();
  auto finish = [&](Partition p, double codelength) {
    p.algorithm = "infomap";
    p.seed = seed;
    p.metadata["codelength"] = codelength;
    return p;
  };
  if (!(two_m > 0.0)) return finish(Partition::singletons(n), 0.0);

  using detail::plogp;
  double node_term = 0.0;
  for (NodeIndex i = 0; i < n; ++i) node_term += plogp(graph.strength(i) / two_m);
  const double one_module = -node_term;

  std::mt19937_64 rng(seed);
  Partition best;
  double best_length = std::numeric_limits<double>::infinity();

  for (std::size_t trial = 0; trial < std::max<std::size_t>(options.trials, 1); ++trial) {
    auto level = detail::LevelGraph::from(graph);
    std::vector<CommunityId> node_to_module(n);
    std::iota(node_to_module.begin(), node_to_module.end(), CommunityId{0});
    double length = 0.0;

    while (true) {
      const auto size = level.size();
      std::vector<double> flow(size), out(size);
      for (NodeIndex i = 0; i < size; ++i) {
        flow[i] = level.strength[i] / two_m;
        out[i] = (level.strength[i] - 2.0 * level.loop[i]) / two_m;
      }
      std::vector<CommunityId> module(size);
      std::iota(module.begin(), module.end(), CommunityId{0});
      std::vector<double> visit(flow), exit(out);
      double total_exit = 0.0, exit_term = 0.0, module_term = 0.0;
      for (NodeIndex i = 0; i < size; ++i) {
        total_exit += exit[i];
        exit_term += plogp(exit[i]);
        module_term += plogp(exit[i] + visit[i]);
      }
      auto codelength = [&] { return plogp(total_exit) - 2.0 * exit_term - node_term + module_term; };
      length = codelength();

      std::vector<NodeIndex> order(size);
      std::iota(order.begin(), order.end(), NodeIndex{0});
      std::vector<double> link_to(size, 0.0);
      std::vector<CommunityId> touched;
      bool moved_any = false;

      for (std::size_t sweep = 0; sweep < options.max_sweeps_per_level; ++sweep) {
        std::shuffle(order.begin(), order.end(), rng);
        bool moved = false;
        for (auto i : order) {
          const auto home = module[i];
          for (const auto& nb : level.adj[i]) {
            const auto c = module[nb.node];
            if (link_to[c] == 0.0) touched.push_back(c);
            link_to[c] += nb.weight / two_m;
          }
          const double home_exit = exit[home] - out[i] + 2.0 * link_to[home];
          const double home_visit = visit[home] - flow[i];
          CommunityId target = home;
          double best_delta = -options.min_improvement;
          double target_exit = 0.0;
          for (auto c : touched) {
            if (c == home) continue;
            const double new_exit = exit[c] + out[i] - 2.0 * link_to[c];
            const double new_total = total_exit - exit[home] - exit[c] + home_exit + new_exit;
            const double delta =
                plogp(new_total) - plogp(total_exit) -
                2.0 * (plogp(home_exit) + plogp(new_exit) - plogp(exit[home]) - plogp(exit[c])) +
                plogp(home_exit + home_visit) + plogp(new_exit + visit[c] + flow[i]) -
                plogp(exit[home] + visit[home]) - plogp(exit[c] + visit[c]);
            if (delta < best_delta) {
              best_delta = delta;
              target = c;
              target_exit = new_exit;
            }
          }
          if (target != home) {
            total_exit += home_exit + target_exit - exit[home] - exit[target];
            exit_term += plogp(home_exit) + plogp(target_exit) - plogp(exit[home]) - plogp(exit[target]);
            module_term += plogp(home_exit + home_visit) + plogp(target_exit + visit[target] + flow[i]) -
                           plogp(exit[home] + visit[home]) - plogp(exit[target] + visit[target]);
            exit[home] = home_exit;
            visit[home] = home_visit;
            exit[target] = target_exit;
            visit[target] += flow[i];
            module[i] = target;
            moved = true;
            if (observer) observer(codelength());
          }
          for (auto c : touched) link_to[c] = 0.0;
          touched.clear();
        }
        if (!moved) break;
        moved_any = true;
      }
      length = codelength();
      if (!moved_any) break;

      auto dense = Partition::from_labels(module);
      for (auto& c : node_to_module) c = dense.membership[c];
      level = level.aggregate(dense.membership, dense.community_count);
    }

    // Recompute from scratch; the incremental sums drift by rounding.
    auto candidate = Partition::from_labels(node_to_module);
    length = map_equation(graph, candidate);
    if (length < best_length) {
      best_length = length;
      best = std::move(candidate);
    }
  }

  if (one_module <= best_length) return finish(Partition::single_community(n), one_module);
  return finish(std::move(best), best_length);
}

}  // namespace coinv
