#include <gtest/gtest.h>

#include "coinv/detect/detect.hpp"
#include "coinv/stats/welch.hpp"
#include "coinv/synth.hpp"
#include "oracles.hpp"

using namespace coinv;
using testing_support::TempDir;

namespace {

std::vector<double> planted_lags(const SynthData& d, CitationCategory c) {
  std::vector<double> out;
  for (const auto& t : d.truth)
    if (t.planted_category == c) out.push_back(t.lag_months);
  return out;
}

Partition planted_partition(const WeightedGraph& g, const SynthData& d) {
  std::vector<std::uint32_t> l;
  for (auto key : g.nodes()) l.push_back(d.planted.at(std::string(key)));
  return Partition::from_labels(l);
}

}  // namespace

TEST(Synth, EpsilonFromEdgeProbabilities) {
  SynthConfig c;
  auto d = generate(c);
  const double inside = 0.3 * 49.0, outside = 0.01 * 150.0;
  EXPECT_NEAR(d.epsilon, outside / (inside + outside), 1e-15);
}

TEST(Synth, SeedDeterminesOutput) {
  SynthConfig c;
  c.seed = 4;
  auto a = generate(c), b = generate(c);
  ASSERT_EQ(a.links.size(), b.links.size());
  EXPECT_TRUE(std::equal(a.links.begin(), a.links.end(), b.links.begin()));
  c.seed = 5;
  auto e = generate(c);
  EXPECT_FALSE(e.links.size() == a.links.size() && std::equal(a.links.begin(), a.links.end(), e.links.begin()));
}

TEST(Synth, FilesRoundTripThroughIngest) {
  TempDir dir("synth_io");
  SynthConfig c;
  c.seed = 2;
  auto d = generate(c);
  write_synth(dir.path(), d);
  auto ps = load_patents(dir.file("patents.tsv"));
  auto ls = load_links(dir.file("links.tsv"));
  auto cs = load_citations(dir.file("citations.tsv"));
  EXPECT_EQ(ps.size(), d.patents.size());
  EXPECT_EQ(ls.size(), d.links.size());
  EXPECT_EQ(cs.size(), d.citations.size());
  auto cohort = filter_cohort(ps, {"257"}, {1995, 1999});
  EXPECT_EQ(cohort.size(), d.truth.size());
}

TEST(Synth, InfeasibleConfigs) {
  SynthConfig c;
  c.community_sizes = {3, 3};
  EXPECT_THROW(generate(c), InfeasibleConfig);
  c = {};
  c.within_p = 1.5;
  EXPECT_THROW(generate(c), InfeasibleConfig);
  c = {};
  c.self_fraction = 0.7;
  c.in_fraction = 0.5;
  EXPECT_THROW(generate(c), InfeasibleConfig);
}

TEST(Synth, ConfigJsonRoundTrip) {
  SynthConfig c;
  c.community_sizes = {10, 20};
  c.in_community_advantage = 5.0;
  nlohmann::json j = c;
  auto back = j.get<SynthConfig>();
  EXPECT_EQ(back.community_sizes, c.community_sizes);
  EXPECT_EQ(back.in_community_advantage, 5.0);
  auto partial = nlohmann::json::parse(R"({"seed": 9})").get<SynthConfig>();
  EXPECT_EQ(partial.seed, 9u);
  EXPECT_EQ(partial.within_p, 0.3);
}

TEST(Synth, NullAdvantageGivesSameLagDistribution) {
  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SynthConfig c;
    c.seed = seed;
    auto d = generate(c);
    auto in = planted_lags(d, CitationCategory::in_community);
    auto out = planted_lags(d, CitationCategory::out_of_community);
    accepted += oracle::ks_statistic(in, out) < oracle::ks_critical(in.size(), out.size());
  }
  EXPECT_GE(accepted, 90);
}

TEST(Synth, PlantedAdvantageDetected) {
  SynthConfig c;
  c.community_sizes.assign(20, 50);
  c.in_community_advantage = 5.0;
  c.citations_per_patent = 1;
  c.patents_per_inventor = 14.0;
  c.seed = 3;
  auto d = generate(c);
  auto in = planted_lags(d, CitationCategory::in_community);
  auto out = planted_lags(d, CitationCategory::out_of_community);
  ASSERT_GE(in.size(), 2000u);
  ASSERT_GE(out.size(), 2000u);
  auto r = welch_t(out, in);
  EXPECT_GT(r.t, 2.0);
}

TEST(Synth, LouvainRecoversPlantedCommunities) {
  SynthConfig c;
  c.seed = 1;
  auto d = generate(c);
  std::vector<PatentRecord> cohort;
  for (const auto& p : d.patents)
    if (p.main_class == c.cohort_class) cohort.push_back(p);
  auto g = largest_component(project(build_bipartite(cohort, d.links)));
  ASSERT_EQ(g.node_count(), 200u);
  auto p = detect_louvain(g, 0);
  EXPECT_GE(adjusted_rand_index(p, planted_partition(g, d)).value, 0.9);
}
