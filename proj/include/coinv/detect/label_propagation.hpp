#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "coinv/partition.hpp"

namespace coinv {

struct LabelPropagationOptions {
  std::size_t max_sweeps = 1000;
  // Relative tolerance when comparing label weights for ties.
  double tie_tolerance = 1e-12;
};

namespace detail {

// Labels carrying the maximal neighbor weight around `node`, ascending.
inline void heaviest_labels(const WeightedGraph& graph, NodeIndex node,
                            const std::vector<CommunityId>& label, std::vector<double>& weight,
                            std::vector<CommunityId>& touched, std::vector<CommunityId>& best,
                            double tolerance) {
  best.clear();
  for (const auto& nb : graph.neighbors(node)) {
    const auto l = label[nb.node];
    if (weight[l] == 0.0) touched.push_back(l);
    weight[l] += nb.weight;
  }
  double top = 0.0;
  for (auto l : touched) top = std::max(top, weight[l]);
  for (auto l : touched)
    if (weight[l] >= top * (1.0 - tolerance)) best.push_back(l);
  std::sort(best.begin(), best.end());
  for (auto l : touched) weight[l] = 0.0;
  touched.clear();
}

}  // namespace detail

// Asynchronous label propagation (Raghavan-Albert-Kumara) with weighted
// majority. Each sweep visits nodes in a freshly shuffled order; ties between
// maximal labels are broken uniformly at random. Stops once every node holds
// one of its maximal labels. `metadata["converged"]` is false when the sweep
// cap was reached first.
inline Partition detect_label_propagation(const WeightedGraph& graph, std::uint64_t seed,
                                          const LabelPropagationOptions& options = {}) {
  const auto n = graph.node_count();
  if (n == 0) throw EmptyGraph("label propagation: graph has no nodes");
  std::mt19937_64 rng(seed);
  std::vector<CommunityId> label(n);
  std::iota(label.begin(), label.end(), CommunityId{0});
  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), NodeIndex{0});
  std::vector<double> weight(n, 0.0);
  std::vector<CommunityId> touched, best;

  auto stable = [&] {
    for (NodeIndex i = 0; i < n; ++i) {
      if (graph.neighbors(i).empty()) continue;
      detail::heaviest_labels(graph, i, label, weight, touched, best, options.tie_tolerance);
      if (!std::binary_search(best.begin(), best.end(), label[i])) return false;
    }
    return true;
  };

  bool converged = false;
  std::size_t sweeps = 0;
  while (sweeps < options.max_sweeps) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      if (graph.neighbors(i).empty()) continue;
      detail::heaviest_labels(graph, i, label, weight, touched, best, options.tie_tolerance);
      if (best.size() == 1) {
        label[i] = best.front();
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
        label[i] = best[pick(rng)];
      }
    }
    ++sweeps;
    if (stable()) {
      converged = true;
      break;
    }
  }

  auto result = Partition::from_labels(label);
  result.algorithm = "labelprop";
  result.seed = seed;
  result.metadata["converged"] = converged;
  result.metadata["sweeps"] = sweeps;
  return result;
}

}  // namespace coinv
