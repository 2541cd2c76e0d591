#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "coinv/error.hpp"
#include "coinv/graph.hpp"

namespace coinv {

using CommunityId = std::uint32_t;

// Node -> community assignment over a graph's node ordering. Community ids are
// dense in [0, community_count).
struct Partition {
  std::vector<CommunityId> membership;
  CommunityId community_count = 0;
  std::string algorithm;
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return membership.size(); }

  std::vector<std::size_t> community_sizes() const {
    std::vector<std::size_t> sizes(community_count, 0);
    for (auto c : membership) ++sizes[c];
    return sizes;
  }

  std::size_t largest_size() const {
    auto s = community_sizes();
    return s.empty() ? 0 : *std::max_element(s.begin(), s.end());
  }

  // Relabels arbitrary labels densely in order of first appearance.
  template <typename Label>
  static Partition from_labels(const std::vector<Label>& labels) {
    Partition p;
    p.membership.resize(labels.size());
    std::unordered_map<Label, CommunityId> dense;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto [it, inserted] = dense.emplace(labels[i], p.community_count);
      if (inserted) ++p.community_count;
      p.membership[i] = it->second;
    }
    return p;
  }

  static Partition singletons(std::size_t n) {
    Partition p;
    p.membership.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.membership[i] = static_cast<CommunityId>(i);
    p.community_count = static_cast<CommunityId>(n);
    return p;
  }

  static Partition single_community(std::size_t n) {
    Partition p;
    p.membership.assign(n, 0);
    p.community_count = n > 0 ? 1 : 0;
    return p;
  }

  // Checks the type invariants: ids dense and every id used.
  bool valid() const {
    std::vector<bool> used(community_count, false);
    for (auto c : membership) {
      if (c >= community_count) return false;
      used[c] = true;
    }
    return std::all_of(used.begin(), used.end(), [](bool b) { return b; });
  }
};

// Weighted Newman-Girvan modularity.
inline double modularity(const WeightedGraph& graph, const Partition& partition) {
  if (partition.size() != graph.node_count())
    throw NodeSetMismatch("partition covers " + std::to_string(partition.size()) + " nodes, graph has " +
                          std::to_string(graph.node_count()));
  const double m = graph.total_weight();
  if (!(m > 0.0)) throw EmptyGraph("modularity undefined on a graph with zero total weight");
  std::vector<double> internal(partition.community_count, 0.0);
  std::vector<double> total(partition.community_count, 0.0);
  for (const auto& e : graph.edges()) {
    if (partition.membership[e.u] == partition.membership[e.v])
      internal[partition.membership[e.u]] += e.weight;
  }
  for (NodeIndex i = 0; i < graph.node_count(); ++i) total[partition.membership[i]] += graph.strength(i);
  double q = 0.0;
  for (CommunityId c = 0; c < partition.community_count; ++c) {
    const double frac = total[c] / (2.0 * m);
    q += internal[c] / m - frac * frac;
  }
  return q;
}

struct AriScore {
  double value = 0.0;
};

// Adjusted Rand index from the pair-counting contingency table.
inline AriScore adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw NodeSetMismatch("partitions cover different node counts");
  const std::size_t n = a.size();
  if (n < 2) return {1.0};
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::unordered_map<std::uint64_t, std::size_t> cells;
  std::vector<std::size_t> rows(a.community_count, 0), cols(b.community_count, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++cells[(static_cast<std::uint64_t>(a.membership[i]) << 32) | b.membership[i]];
    ++rows[a.membership[i]];
    ++cols[b.membership[i]];
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [_, c] : cells) index += choose2(static_cast<double>(c));
  for (auto r : rows) sum_rows += choose2(static_cast<double>(r));
  for (auto c : cols) sum_cols += choose2(static_cast<double>(c));
  const double expected = sum_rows * sum_cols / choose2(static_cast<double>(n));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) {
    // Both partitions trivial (all singletons or one block): agreement is
    // all-or-nothing.
    return {index == max_index ? 1.0 : 0.0};
  }
  return {(index - expected) / (max_index - expected)};
}

// Reassigns nodes uniformly at random to the existing community slots: each
// community keeps its id and size, members are drawn from a random permutation.
inline Partition randomize_within_structure(const Partition& partition, std::uint64_t seed) {
  std::vector<NodeIndex> order(partition.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<NodeIndex>(i);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Partition out = partition;
  out.seed = seed;
  out.algorithm = partition.algorithm + "+randomized";
  auto sizes = partition.community_sizes();
  std::size_t cursor = 0;
  for (CommunityId c = 0; c < partition.community_count; ++c) {
    for (std::size_t k = 0; k < sizes[c]; ++k) out.membership[order[cursor++]] = c;
  }
  return out;
}

struct SizeHistogram {
  std::size_t bin_width = 1;
  // counts[k] = communities with size in [k*w + 1, (k+1)*w]
  std::vector<std::size_t> counts;
  std::vector<std::size_t> out_of_range;  // sizes above the displayed range, descending

  std::size_t total() const {
    std::size_t t = out_of_range.size();
    for (auto c : counts) t += c;
    return t;
  }
};

// Community sizes binned by `bin_width`. With `max_size`, larger communities
// are listed individually instead of binned.
inline SizeHistogram size_distribution(const Partition& partition, std::size_t bin_width,
                                       std::optional<std::size_t> max_size = std::nullopt) {
  if (bin_width < 1) throw std::invalid_argument("bin width must be >= 1");
  SizeHistogram h;
  h.bin_width = bin_width;
  for (auto s : partition.community_sizes()) {
    if (max_size && s > *max_size) {
      h.out_of_range.push_back(s);
      continue;
    }
    const auto bin = (s - 1) / bin_width;
    if (h.counts.size() <= bin) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }
  std::sort(h.out_of_range.rbegin(), h.out_of_range.rend());
  return h;
}

// `node_id<TAB>community_id`, one row per node in graph order.
inline void write_partition(const std::string& path, const WeightedGraph& graph, const Partition& p) {
  if (p.size() != graph.node_count()) throw NodeSetMismatch("partition/graph size mismatch");
  auto out = detail::open_for_write(path);
  for (NodeIndex i = 0; i < graph.node_count(); ++i) out << graph.key(i) << '\t' << p.membership[i] << '\n';
}

// Reads a partition file against `graph`; every graph node must appear
// exactly once. Community ids are re-densified by first appearance.
inline Partition read_partition(const std::string& path, const WeightedGraph& graph) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  constexpr auto unset = static_cast<std::int64_t>(-1);
  std::vector<std::int64_t> labels(graph.node_count(), unset);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = detail::trim(line);
    if (t.empty()) continue;
    auto f = detail::split(t, '\t');
    if (f.size() != 2) throw MalformedRow(line_no, "expected node<TAB>community");
    auto node = graph.find(std::string(f[0]));
    if (!node) throw UnknownNode(std::string(f[0]));
    std::int64_t c = 0;
    auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), c);
    if (ec != std::errc{} || ptr != f[1].data() + f[1].size() || c < 0)
      throw MalformedRow(line_no, "bad community id");
    if (labels[*node] != unset) throw DuplicateId("node " + std::string(f[0]) + " assigned twice");
    labels[*node] = c;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == unset) throw UnpartitionedNode(graph.key(static_cast<NodeIndex>(i)));
  }
  return Partition::from_labels(labels);
}

}  // namespace coinv
