#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "coinv/error.hpp"
#include "coinv/ingest.hpp"
#include "coinv/union_find.hpp"

namespace coinv {

using NodeIndex = std::uint32_t;

struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  NodeIndex node;
  double weight;
};

// Undirected weighted graph over string-keyed nodes. Nodes are sorted by key
// and every algorithm indexes against that ordering. Edges are stored once
// with u < v, sorted by (u, v); adjacency is materialized in CSR form.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(std::vector<std::string> nodes, std::vector<Edge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!(nodes_[i - 1] < nodes_[i]))
        throw InvalidGraph("node keys must be unique and sorted");
    }
    for (auto& e : edges_) {
      if (e.u == e.v) throw InvalidGraph("self-loop on node " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.v >= nodes_.size()) throw InvalidGraph("edge endpoint out of range");
      if (!(e.weight > 0.0)) throw InvalidGraph("edge weights must be positive");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
        throw InvalidGraph("parallel edge");
    }
    build_adjacency();
  }

  // Graph whose node keys are zero-padded indices, so key order is index order.
  static WeightedGraph indexed(std::size_t n, std::vector<Edge> edges) {
    std::vector<std::string> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "n%08zu", i);
      keys[i] = buf;
    }
    return WeightedGraph(std::move(keys), std::move(edges));
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const std::string> nodes() const { return nodes_; }
  const std::string& key(NodeIndex i) const { return nodes_[i]; }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const Neighbor> neighbors(NodeIndex i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }

  // Weighted degree.
  double strength(NodeIndex i) const { return strength_[i]; }
  // Sum of edge weights, each edge counted once (m).
  double total_weight() const { return total_weight_; }

  std::optional<NodeIndex> find(const std::string& key) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key);
    if (it == nodes_.end() || *it != key) return std::nullopt;
    return static_cast<NodeIndex>(it - nodes_.begin());
  }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  void build_adjacency() {
    const auto n = nodes_.size();
    offsets_.assign(n + 1, 0);
    strength_.assign(n, 0.0);
    for (const auto& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.resize(offsets_[n]);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    total_weight_ = 0.0;
    for (const auto& e : edges_) {
      adjacency_[cursor[e.u]++] = {e.v, e.weight};
      adjacency_[cursor[e.v]++] = {e.u, e.weight};
      strength_[e.u] += e.weight;
      strength_[e.v] += e.weight;
      total_weight_ += e.weight;
    }
  }

  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::vector<double> strength_;
  double total_weight_ = 0.0;
};

// Two-mode patent/inventor network restricted to a cohort.
struct BipartiteNetwork {
  std::vector<std::string> patents;    // sorted
  std::vector<std::string> inventors;  // sorted
  // incidence[p] = sorted inventor indices listed on patents[p]
  std::vector<std::vector<NodeIndex>> incidence;
  std::size_t excluded_links = 0;  // links to patents outside the cohort
};

inline BipartiteNetwork build_bipartite(std::span<const PatentRecord> cohort,
                                        std::span<const InventorLink> links) {
  BipartiteNetwork net;
  net.patents.reserve(cohort.size());
  for (const auto& p : cohort) net.patents.push_back(p.patent_id);
  std::sort(net.patents.begin(), net.patents.end());

  std::unordered_map<std::string, std::size_t> patent_index;
  for (std::size_t i = 0; i < net.patents.size(); ++i) patent_index.emplace(net.patents[i], i);

  std::vector<const InventorLink*> kept;
  std::set<std::string> inventors;
  for (const auto& l : links) {
    if (!patent_index.contains(l.patent_id)) {
      ++net.excluded_links;
      continue;
    }
    kept.push_back(&l);
    inventors.insert(l.inventor_id);
  }
  net.inventors.assign(inventors.begin(), inventors.end());
  std::unordered_map<std::string, NodeIndex> inventor_index;
  for (std::size_t i = 0; i < net.inventors.size(); ++i)
    inventor_index.emplace(net.inventors[i], static_cast<NodeIndex>(i));

  net.incidence.assign(net.patents.size(), {});
  for (const auto* l : kept)
    net.incidence[patent_index.at(l->patent_id)].push_back(inventor_index.at(l->inventor_id));
  for (auto& row : net.incidence) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return net;
}

// One-mode projection onto inventors: w_ij = sum over patents listing both
// i and j of 1 / (n - 1), n being the patent's inventor count. Patents are
// visited in ascending key order, fixing the summation order.
inline WeightedGraph project(const BipartiteNetwork& bipartite) {
  std::unordered_map<std::uint64_t, double> weights;
  for (const auto& team : bipartite.incidence) {
    const auto n = team.size();
    if (n < 2) continue;
    const double w = 1.0 / static_cast<double>(n - 1);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const auto key = (static_cast<std::uint64_t>(team[a]) << 32) | team[b];
        weights[key] += w;
      }
    }
  }
  std::vector<Edge> edges;
  edges.reserve(weights.size());
  for (const auto& [key, w] : weights)
    edges.push_back({static_cast<NodeIndex>(key >> 32), static_cast<NodeIndex>(key & 0xffffffffu), w});
  return WeightedGraph(bipartite.inventors, std::move(edges));
}

struct ComponentLabeling {
  std::vector<std::uint32_t> component_of;  // per node
  std::vector<std::size_t> sizes;           // per component

  std::size_t count() const { return sizes.size(); }

  // Largest component id; ties go to the lowest id. nullopt when empty.
  std::optional<std::uint32_t> largest() const {
    if (sizes.empty()) return std::nullopt;
    return static_cast<std::uint32_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  }

  std::vector<NodeIndex> nodes_of(std::uint32_t component) const {
    std::vector<NodeIndex> out;
    for (std::size_t i = 0; i < component_of.size(); ++i)
      if (component_of[i] == component) out.push_back(static_cast<NodeIndex>(i));
    return out;
  }
};

// Component ids are numbered in order of each component's lowest node index.
inline ComponentLabeling connected_components(const WeightedGraph& graph) {
  UnionFind uf(graph.node_count());
  for (const auto& e : graph.edges()) uf.unite(e.u, e.v);
  ComponentLabeling out;
  out.component_of.assign(graph.node_count(), 0);
  std::unordered_map<std::uint32_t, std::uint32_t> root_to_id;
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    auto [it, inserted] = root_to_id.emplace(uf.find(i), static_cast<std::uint32_t>(out.sizes.size()));
    if (inserted) out.sizes.push_back(0);
    out.component_of[i] = it->second;
    ++out.sizes[it->second];
  }
  return out;
}

// Subgraph on the given node indices (any order, duplicates ignored).
inline WeightedGraph induced_subgraph(const WeightedGraph& graph, std::span<const NodeIndex> nodes) {
  std::vector<NodeIndex> keep(nodes.begin(), nodes.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  constexpr auto absent = static_cast<NodeIndex>(-1);
  std::vector<NodeIndex> remap(graph.node_count(), absent);
  std::vector<std::string> keys;
  keys.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= graph.node_count()) throw UnknownNode("node index " + std::to_string(keep[i]));
    remap[keep[i]] = static_cast<NodeIndex>(i);
    keys.push_back(graph.key(keep[i]));
  }
  std::vector<Edge> edges;
  for (const auto& e : graph.edges()) {
    if (remap[e.u] != absent && remap[e.v] != absent)
      edges.push_back({remap[e.u], remap[e.v], e.weight});
  }
  return WeightedGraph(std::move(keys), std::move(edges));
}

inline WeightedGraph induced_subgraph(const WeightedGraph& graph, std::span<const std::string> keys) {
  std::vector<NodeIndex> idx;
  idx.reserve(keys.size());
  for (const auto& k : keys) {
    auto i = graph.find(k);
    if (!i) throw UnknownNode(k);
    idx.push_back(*i);
  }
  return induced_subgraph(graph, std::span<const NodeIndex>(idx));
}

inline WeightedGraph largest_component(const WeightedGraph& graph) {
  auto labels = connected_components(graph);
  auto lcc = labels.largest();
  if (!lcc) return {};
  auto nodes = labels.nodes_of(*lcc);
  return induced_subgraph(graph, std::span<const NodeIndex>(nodes));
}

struct Composition {
  std::map<std::string, double> shares;  // labeled buckets
  double unlabeled = 0.0;
};

// Share of `nodes` carrying each label; nodes missing from `attribute` fall
// into the unlabeled bucket.
inline Composition composition_by_attribute(std::span<const std::string> nodes,
                                            const std::unordered_map<std::string, std::string>& attribute) {
  Composition out;
  if (nodes.empty()) return out;
  std::map<std::string, std::size_t> counts;
  std::size_t unlabeled = 0;
  for (const auto& n : nodes) {
    auto it = attribute.find(n);
    if (it == attribute.end()) ++unlabeled;
    else ++counts[it->second];
  }
  const double total = static_cast<double>(nodes.size());
  for (const auto& [label, c] : counts) out.shares[label] = static_cast<double>(c) / total;
  out.unlabeled = static_cast<double>(unlabeled) / total;
  return out;
}

// Each inventor's most frequent assignee over the cohort (ties: lowest id).
inline std::unordered_map<std::string, std::string> inventor_assignees(
    std::span<const PatentRecord> cohort, std::span<const InventorLink> links) {
  std::unordered_map<std::string, const PatentRecord*> by_id;
  for (const auto& p : cohort) by_id.emplace(p.patent_id, &p);
  std::unordered_map<std::string, std::map<std::string, std::size_t>> tally;
  for (const auto& l : links) {
    auto it = by_id.find(l.patent_id);
    if (it == by_id.end() || !it->second->assignee_id) continue;
    ++tally[l.inventor_id][*it->second->assignee_id];
  }
  std::unordered_map<std::string, std::string> out;
  for (const auto& [inventor, counts] : tally) {
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second) best = it;
    out.emplace(inventor, best->first);
  }
  return out;
}

}  // namespace coinv
