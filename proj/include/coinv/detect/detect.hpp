#pragma once

#include <array>
#include <string>
#include <string_view>

#include "coinv/detect/greedy.hpp"
#include "coinv/detect/infomap.hpp"
#include "coinv/detect/label_propagation.hpp"
#include "coinv/detect/louvain.hpp"
#include "coinv/detect/walktrap.hpp"

namespace coinv {

enum class Algorithm { greedy, louvain, infomap, walktrap, labelprop };

inline constexpr std::array<Algorithm, 5> kAllAlgorithms = {
    Algorithm::greedy, Algorithm::louvain, Algorithm::infomap, Algorithm::walktrap,
    Algorithm::labelprop};

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::greedy: return "greedy";
    case Algorithm::louvain: return "louvain";
    case Algorithm::infomap: return "infomap";
    case Algorithm::walktrap: return "walktrap";
    case Algorithm::labelprop: return "labelprop";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (auto a : kAllAlgorithms)
    if (algorithm_name(a) == name) return a;
  throw ConfigError("unknown detector '" + std::string(name) +
                    "' (expected greedy, louvain, infomap, walktrap or labelprop)");
}

// Runs `detector` on every connected component separately and unites the
// results; community ids are offset in component order.
template <typename Detector>
Partition run_per_component(const WeightedGraph& graph, Detector&& detector) {
  auto components = connected_components(graph);
  if (components.count() <= 1) return detector(graph);
  Partition out;
  out.membership.assign(graph.node_count(), 0);
  for (std::uint32_t c = 0; c < components.count(); ++c) {
    auto nodes = components.nodes_of(c);
    auto sub = induced_subgraph(graph, std::span<const NodeIndex>(nodes));
    auto part = detector(sub);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      out.membership[nodes[i]] = out.community_count + part.membership[i];
    out.community_count += part.community_count;
    if (c == 0) {
      out.algorithm = part.algorithm;
      out.seed = part.seed;
      out.metadata = part.metadata;
    }
  }
  out.metadata.erase("codelength");
  out.metadata.erase("best_modularity");
  out.metadata["per_component"] = true;
  out.metadata["components"] = components.count();
  return out;
}

struct DetectOptions {
  std::size_t walk_steps = 4;
  std::size_t infomap_trials = 1;
};

// Dispatches to a detector. The walk-based detectors (walktrap, infomap) are
// run per connected component on disconnected input.
inline Partition detect(const WeightedGraph& graph, Algorithm algorithm, std::uint64_t seed,
                        const DetectOptions& options = {}) {
  switch (algorithm) {
    case Algorithm::greedy: return detect_greedy(graph, seed);
    case Algorithm::louvain: return detect_louvain(graph, seed);
    case Algorithm::labelprop: return detect_label_propagation(graph, seed);
    case Algorithm::walktrap:
      if (graph.node_count() == 0) throw EmptyGraph("walktrap: graph has no nodes");
      return run_per_component(graph, [&](const WeightedGraph& g) {
        return detect_random_walks(g, seed, {options.walk_steps});
      });
    case Algorithm::infomap:
      if (graph.node_count() == 0) throw EmptyGraph("infomap: graph has no nodes");
      return run_per_component(graph, [&](const WeightedGraph& g) {
        InfomapOptions o;
        o.trials = options.infomap_trials;
        return detect_infomap(g, seed, o);
      });
  }
  throw ConfigError("unhandled detector");
}

// Mean pairwise ARI over `runs` runs with seeds base_seed, base_seed+1, ...
inline double self_similarity(const WeightedGraph& graph, Algorithm algorithm, std::uint64_t base_seed,
                              std::size_t runs, const DetectOptions& options = {}) {
  std::vector<Partition> parts;
  for (std::size_t r = 0; r < runs; ++r) parts.push_back(detect(graph, algorithm, base_seed + r, options));
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      sum += adjusted_rand_index(parts[i], parts[j]).value;
      ++pairs;
    }
  return pairs ? sum / static_cast<double>(pairs) : 1.0;
}

}  // namespace coinv
