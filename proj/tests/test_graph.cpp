#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "coinv/graph.hpp"
#include "coinv/graph_io.hpp"
#include "oracles.hpp"

using namespace coinv;
using testing_support::TempDir;

namespace {

std::vector<PatentRecord> cohort_of(const std::vector<std::string>& ids) {
  std::vector<PatentRecord> out;
  for (const auto& id : ids) out.push_back({id, *parse_date("1996-01-01"), *parse_date("1995-01-01"), "257", {}});
  return out;
}

double weight(const WeightedGraph& g, const std::string& a, const std::string& b) {
  const auto i = *g.find(a);
  const auto j = *g.find(b);
  for (const auto& nb : g.neighbors(i))
    if (nb.node == j) return nb.weight;
  return 0.0;
}

// Random teams over `inventors` inventors, as patents P000.. and links.
struct Fixture {
  std::vector<std::vector<int>> teams;
  std::vector<PatentRecord> cohort;
  std::vector<InventorLink> links;
};

std::string inv_key(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "I%03d", i);
  return buf;
}

Fixture random_fixture(std::mt19937_64& rng, int max_patents, int inventors) {
  Fixture f;
  const int patents = std::uniform_int_distribution<int>(1, max_patents)(rng);
  std::vector<std::string> ids;
  for (int p = 0; p < patents; ++p) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%03d", p);
    ids.push_back(buf);
    const int size = std::uniform_int_distribution<int>(0, std::min(6, inventors))(rng);
    std::vector<int> all(inventors);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<int> team(all.begin(), all.begin() + size);
    for (int i : team) f.links.push_back({buf, inv_key(i)});
    f.teams.push_back(team);
  }
  f.cohort = cohort_of(ids);
  return f;
}

}  // namespace

TEST(Bipartite, SinglePatentIncidence) {
  auto net = build_bipartite(cohort_of({"P1"}), std::vector<InventorLink>{{"P1", "A"}, {"P1", "B"}});
  ASSERT_EQ(net.incidence.size(), 1u);
  EXPECT_EQ(net.inventors, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(net.incidence[0], (std::vector<NodeIndex>{0, 1}));
}

TEST(Bipartite, LinkToNonCohortPatentExcluded) {
  auto net = build_bipartite(cohort_of({"P1"}), std::vector<InventorLink>{{"P1", "A"}, {"P9", "B"}});
  EXPECT_EQ(net.excluded_links, 1u);
  EXPECT_EQ(net.inventors, (std::vector<std::string>{"A"}));
}

TEST(Bipartite, PatentWithoutInventorsKept) {
  auto net = build_bipartite(cohort_of({"P1", "P2"}), std::vector<InventorLink>{{"P1", "A"}});
  EXPECT_EQ(net.patents.size(), 2u);
  EXPECT_TRUE(net.incidence[1].empty());
}

TEST(Projection, PairWeightIsOne) {
  auto g = project(build_bipartite(cohort_of({"P1"}), std::vector<InventorLink>{{"P1", "A"}, {"P1", "B"}}));
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_DOUBLE_EQ(weight(g, "A", "B"), 1.0);
}

TEST(Projection, HandEvaluatedWeights) {
  std::vector<InventorLink> links{{"P1", "A"}, {"P1", "B"}, {"P2", "A"}, {"P2", "B"}, {"P2", "C"}};
  auto g = project(build_bipartite(cohort_of({"P1", "P2"}), links));
  EXPECT_DOUBLE_EQ(weight(g, "A", "B"), 1.5);
  EXPECT_DOUBLE_EQ(weight(g, "A", "C"), 0.5);
  EXPECT_DOUBLE_EQ(weight(g, "B", "C"), 0.5);
}

TEST(Projection, SingleInventorPatentHasNoEdges) {
  auto g = project(build_bipartite(cohort_of({"P1"}), std::vector<InventorLink>{{"P1", "A"}}));
  EXPECT_EQ(g.node_count(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Projection, MatchesBruteForceAndConservesWeight) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_fixture(rng, 20, 15);
    auto g = project(build_bipartite(f.cohort, f.links));
    auto expected = oracle::projection(f.teams, 15);
    ASSERT_EQ(g.edge_count(), expected.size());
    for (const auto& [pair, w] : expected) EXPECT_NEAR(weight(g, inv_key(pair.first), inv_key(pair.second)), w, 1e-12);
    double conserved = 0.0;
    for (const auto& t : f.teams)
      if (t.size() >= 2) conserved += t.size() / 2.0;
    EXPECT_NEAR(g.total_weight(), conserved, 1e-12);
  }
}

TEST(Projection, PatentOrderDoesNotMatter) {
  std::mt19937_64 rng(3);
  auto f = random_fixture(rng, 20, 15);
  auto g1 = project(build_bipartite(f.cohort, f.links));
  auto cohort = f.cohort;
  auto links = f.links;
  std::reverse(cohort.begin(), cohort.end());
  std::shuffle(links.begin(), links.end(), rng);
  auto g2 = project(build_bipartite(cohort, links));
  EXPECT_TRUE(g1 == g2);
}

TEST(Graph, RejectsBadInput) {
  EXPECT_THROW(WeightedGraph({"b", "a"}, {}), InvalidGraph);
  EXPECT_THROW(WeightedGraph({"a", "b"}, {{0, 0, 1.0}}), InvalidGraph);
  EXPECT_THROW(WeightedGraph({"a", "b"}, {{0, 1, 0.0}}), InvalidGraph);
  EXPECT_THROW(WeightedGraph({"a", "b"}, {{0, 1, 1.0}, {1, 0, 1.0}}), InvalidGraph);
}

TEST(Components, TwoDisjointEdges) {
  auto g = WeightedGraph::indexed(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  auto c = connected_components(g);
  EXPECT_EQ(c.count(), 2u);
  EXPECT_EQ(c.sizes, (std::vector<std::size_t>{2, 2}));
}

TEST(Components, EmptyGraphHasNone) {
  WeightedGraph g;
  EXPECT_EQ(connected_components(g).count(), 0u);
  EXPECT_EQ(largest_component(g).node_count(), 0u);
}

TEST(Components, LccIsMaximal) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = oracle::random_graph(30, 0.06, rng);
    auto lcc = largest_component(g);
    auto labels = connected_components(g);
    EXPECT_EQ(lcc.node_count(), labels.sizes[*labels.largest()]);
    for (const auto& e : g.edges()) {
      const bool a = lcc.find(g.key(e.u)).has_value();
      const bool b = lcc.find(g.key(e.v)).has_value();
      EXPECT_EQ(a, b);
    }
  }
}

TEST(InducedSubgraph, IdentityAndTriangle) {
  auto tri = WeightedGraph({"A", "B", "C"}, {{0, 1, 1.0}, {1, 2, 2.0}, {0, 2, 3.0}});
  std::vector<std::string> all(tri.nodes().begin(), tri.nodes().end());
  EXPECT_TRUE(induced_subgraph(tri, std::span<const std::string>(all)) == tri);
  std::vector<std::string> ab{"A", "B"};
  auto sub = induced_subgraph(tri, std::span<const std::string>(ab));
  ASSERT_EQ(sub.edge_count(), 1u);
  EXPECT_DOUBLE_EQ(sub.edges()[0].weight, 1.0);
  std::vector<std::string> bad{"Z"};
  EXPECT_THROW(induced_subgraph(tri, std::span<const std::string>(bad)), UnknownNode);
}

TEST(InducedSubgraph, OneEndpointPerEdgeGivesNoEdges) {
  auto g = WeightedGraph::indexed(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  std::vector<NodeIndex> keep{0, 2};
  EXPECT_EQ(induced_subgraph(g, std::span<const NodeIndex>(keep)).edge_count(), 0u);
}

TEST(Composition, Shares) {
  std::vector<std::string> nodes{"a", "b", "c"};
  auto c = composition_by_attribute(nodes, {{"a", "X"}, {"b", "X"}, {"c", "Y"}});
  EXPECT_NEAR(c.shares["X"], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.shares["Y"], 1.0 / 3.0, 1e-15);
  auto one = composition_by_attribute(nodes, {{"a", "X"}, {"b", "X"}, {"c", "X"}});
  EXPECT_DOUBLE_EQ(one.shares["X"], 1.0);
}

TEST(GraphIo, EdgeListRoundTripIsExact) {
  TempDir dir("graph_io");
  std::mt19937_64 rng(9);
  auto g = oracle::random_graph(25, 0.2, rng);
  write_edge_list(dir.file("g.tsv"), g);
  write_node_list(dir.file("n.txt"), g);
  auto back = read_edge_list(dir.file("g.tsv"), read_node_list(dir.file("n.txt")));
  EXPECT_TRUE(back == g);
}

TEST(GraphIo, GraphmlListsNodesAndWeights) {
  TempDir dir("graphml");
  auto g = WeightedGraph({"A&B", "C"}, {{0, 1, 0.5}});
  std::vector<std::uint32_t> comm{0, 1};
  write_graphml(dir.file("g.graphml"), g, &comm);
  auto text = testing_support::read_text(dir.file("g.graphml"));
  EXPECT_NE(text.find("A&amp;B"), std::string::npos);
  EXPECT_NE(text.find("<data key=\"weight\">0.5</data>"), std::string::npos);
  EXPECT_NE(text.find("<data key=\"community\">1</data>"), std::string::npos);
}
