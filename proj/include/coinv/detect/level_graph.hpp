#pragma once

#include <algorithm>
#include <vector>

#include "coinv/partition.hpp"

namespace coinv::detail {

// Working graph for multi-level detectors: plain adjacency without self
// entries plus a per-node loop weight carrying the weight internal to an
// aggregated node (each internal edge counted once).
struct LevelGraph {
  std::vector<std::vector<Neighbor>> adj;
  std::vector<double> loop;
  std::vector<double> strength;  // sum(adj) + 2 * loop

  std::size_t size() const { return adj.size(); }

  static LevelGraph from(const WeightedGraph& g) {
    LevelGraph out;
    const auto n = g.node_count();
    out.adj.resize(n);
    out.loop.assign(n, 0.0);
    out.strength.assign(n, 0.0);
    for (NodeIndex i = 0; i < n; ++i) {
      auto nb = g.neighbors(i);
      out.adj[i].assign(nb.begin(), nb.end());
      out.strength[i] = g.strength(i);
    }
    return out;
  }

  // Collapses each community into one node. Adjacency lists come out sorted
  // by neighbor id.
  LevelGraph aggregate(const std::vector<CommunityId>& membership, CommunityId count) const {
    LevelGraph out;
    out.adj.resize(count);
    out.loop.assign(count, 0.0);
    out.strength.assign(count, 0.0);
    std::vector<std::vector<NodeIndex>> members(count);
    for (NodeIndex i = 0; i < size(); ++i) members[membership[i]].push_back(i);
    std::vector<double> scratch(count, 0.0);
    std::vector<CommunityId> touched;
    for (CommunityId c = 0; c < count; ++c) {
      for (auto i : members[c]) {
        out.loop[c] += loop[i];
        out.strength[c] += strength[i];
        for (const auto& nb : adj[i]) {
          const auto d = membership[nb.node];
          if (d == c) {
            out.loop[c] += 0.5 * nb.weight;
          } else {
            if (scratch[d] == 0.0) touched.push_back(d);
            scratch[d] += nb.weight;
          }
        }
      }
      std::sort(touched.begin(), touched.end());
      for (auto d : touched) {
        out.adj[c].push_back({d, scratch[d]});
        scratch[d] = 0.0;
      }
      touched.clear();
    }
    return out;
  }
};

}  // namespace coinv::detail
