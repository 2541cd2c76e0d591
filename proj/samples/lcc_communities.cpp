#include <cstdio>

#include "coinv/coinv.hpp"

// Usage: lcc_communities patents.tsv links.tsv
int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s patents.tsv links.tsv\n", argv[0]);
    return 2;
  }
  using namespace coinv;
  auto patents = load_patents(argv[1]);
  auto links = load_links(argv[2]);
  auto graph = project(build_bipartite(patents, links));
  auto lcc = largest_component(graph);
  std::printf("%zu inventors, %zu in the largest component\n", graph.node_count(), lcc.node_count());
  for (auto a : kAllAlgorithms) {
    auto p = detect(lcc, a, 1);
    std::printf("%-10s %6u communities  Q = %.4f\n", std::string(algorithm_name(a)).c_str(), p.community_count,
                modularity(lcc, p));
  }
}
