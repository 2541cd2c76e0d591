#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "coinv/graph.hpp"

namespace coinv {

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// `u<TAB>v<TAB>weight`, one line per edge, keyed by node id. Isolated nodes
// cannot be expressed here; pair with write_node_list when they matter.
inline void write_edge_list(const std::string& path, const WeightedGraph& graph) {
  auto out = detail::open_for_write(path);
  for (const auto& e : graph.edges())
    out << graph.key(e.u) << '\t' << graph.key(e.v) << '\t' << format_real(e.weight) << '\n';
}

inline void write_node_list(const std::string& path, const WeightedGraph& graph) {
  auto out = detail::open_for_write(path);
  for (const auto& k : graph.nodes()) out << k << '\n';
}

inline std::vector<std::string> read_node_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = detail::trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// Reads an edge list; `extra_nodes` adds nodes with no incident edges.
inline WeightedGraph read_edge_list(const std::string& path,
                                    const std::vector<std::string>& extra_nodes = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  struct RawEdge {
    std::string u, v;
    double w;
  };
  std::vector<RawEdge> raw;
  std::set<std::string> keys(extra_nodes.begin(), extra_nodes.end());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = detail::trim(line);
    if (t.empty()) continue;
    auto f = detail::split(t, '\t');
    if (f.size() != 3) throw MalformedRow(line_no, "expected u<TAB>v<TAB>weight");
    RawEdge e{std::string(f[0]), std::string(f[1]), 0.0};
    try {
      e.w = std::stod(std::string(f[2]));
    } catch (const std::exception&) {
      throw MalformedRow(line_no, "bad weight");
    }
    keys.insert(e.u);
    keys.insert(e.v);
    raw.push_back(std::move(e));
  }
  std::vector<std::string> nodes(keys.begin(), keys.end());
  std::map<std::string, NodeIndex> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i], static_cast<NodeIndex>(i));
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& e : raw) edges.push_back({index.at(e.u), index.at(e.v), e.w});
  return WeightedGraph(std::move(nodes), std::move(edges));
}

namespace detail {
inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}
}  // namespace detail

// GraphML with a `weight` edge attribute and, optionally, a `community` node
// attribute (membership indexed like the graph's nodes).
inline void write_graphml(const std::string& path, const WeightedGraph& graph,
                          const std::vector<std::uint32_t>* community = nullptr) {
  auto out = detail::open_for_write(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
  if (community)
    out << "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n";
  out << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    out << "    <node id=\"" << detail::xml_escape(graph.key(i)) << '"';
    if (community)
      out << "><data key=\"community\">" << (*community)[i] << "</data></node>\n";
    else
      out << "/>\n";
  }
  for (const auto& e : graph.edges()) {
    out << "    <edge source=\"" << detail::xml_escape(graph.key(e.u)) << "\" target=\""
        << detail::xml_escape(graph.key(e.v)) << "\"><data key=\"weight\">"
        << format_real(e.weight) << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

}  // namespace coinv
