#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coinv/citation.hpp"
#include "coinv/detect/detect.hpp"
#include "coinv/graph.hpp"
#include "coinv/graph_io.hpp"
#include "coinv/ingest.hpp"
#include "coinv/partition.hpp"
#include "coinv/stats/histogram.hpp"
#include "coinv/stats/lognormal.hpp"
#include "coinv/stats/summary.hpp"
#include "coinv/stats/welch.hpp"

namespace coinv {

namespace fs = std::filesystem;
using nlohmann::json;

// Batch configuration. Stored as a flat JSON object whose keys double as
// command-line flag names.
struct PipelineConfig {
  std::string patents;
  std::string links;
  std::string citations;
  PatentSchema patent_schema;
  LinkSchema link_schema;
  CitationSchema citation_schema;
  std::set<std::string> classes{"257", "326", "438"};
  YearRange years{1995, 1999};
  std::vector<Algorithm> detectors{kAllAlgorithms.begin(), kAllAlgorithms.end()};
  std::size_t walk_steps = 4;
  std::size_t infomap_trials = 1;
  std::uint64_t detect_seed = 0;
  std::uint64_t subsample_seed = 0;
  std::uint64_t control_seed = 0;
  std::size_t ari_runs = 10;
  double window_months = 120.0;
  double bin_width = 2.0;
  std::size_t subsample_k = 300;
  std::size_t subsample_reps = 500;
  double alpha = 0.05;
  bool exclude_self_zero_bin = true;
  TieRule tie_rule = TieRule::priority;
  unsigned workers = 1;
  std::string output_dir = "out";

  DetectOptions detect_options() const { return {walk_steps, infomap_trials}; }
};

enum class ConfigValue { string, integer, real, boolean, list };

// Every accepted configuration key and its value type.
inline const std::map<std::string, ConfigValue>& config_keys() {
  static const std::map<std::string, ConfigValue> keys = {
      {"patents", ConfigValue::string},
      {"links", ConfigValue::string},
      {"citations", ConfigValue::string},
      {"delimiter", ConfigValue::string},
      {"col_patent_id", ConfigValue::string},
      {"col_grant_date", ConfigValue::string},
      {"col_application_date", ConfigValue::string},
      {"col_main_class", ConfigValue::string},
      {"col_assignee_id", ConfigValue::string},
      {"col_link_patent_id", ConfigValue::string},
      {"col_inventor_id", ConfigValue::string},
      {"col_citing_id", ConfigValue::string},
      {"col_cited_id", ConfigValue::string},
      {"classes", ConfigValue::list},
      {"year_from", ConfigValue::integer},
      {"year_to", ConfigValue::integer},
      {"detectors", ConfigValue::list},
      {"walk_steps", ConfigValue::integer},
      {"infomap_trials", ConfigValue::integer},
      {"detect_seed", ConfigValue::integer},
      {"subsample_seed", ConfigValue::integer},
      {"control_seed", ConfigValue::integer},
      {"ari_runs", ConfigValue::integer},
      {"window_months", ConfigValue::real},
      {"bin_width", ConfigValue::real},
      {"subsample_k", ConfigValue::integer},
      {"subsample_reps", ConfigValue::integer},
      {"alpha", ConfigValue::real},
      {"exclude_self_zero_bin", ConfigValue::boolean},
      {"tie_rule", ConfigValue::string},
      {"workers", ConfigValue::integer},
      {"output_dir", ConfigValue::string},
  };
  return keys;
}

// Parses a command-line string into the JSON type expected for `key`.
inline json config_value_from_string(const std::string& key, const std::string& text) {
  auto it = config_keys().find(key);
  if (it == config_keys().end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    switch (it->second) {
      case ConfigValue::string: return text;
      case ConfigValue::integer: {
        std::size_t pos = 0;
        auto v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
      }
      case ConfigValue::real: {
        std::size_t pos = 0;
        auto v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
      }
      case ConfigValue::boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        throw std::invalid_argument(text);
      case ConfigValue::list: {
        json arr = json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) arr.push_back(item);
        return arr;
      }
    }
  } catch (const std::exception&) {
    throw ConfigError("bad value '" + text + "' for " + key);
  }
  return text;
}

namespace detail {
inline char parse_delimiter(const std::string& s) {
  if (s == "tab" || s == "\t") return '\t';
  if (s == "comma" || s == ",") return ',';
  throw ConfigError("delimiter must be 'tab' or 'comma'");
}
}  // namespace detail

// Validates and converts a flat JSON object. Unknown keys, unknown detector
// names and missing seeds are errors.
inline PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!config_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  for (const char* seed : {"detect_seed", "subsample_seed", "control_seed"})
    if (!j.contains(seed)) throw ConfigError(std::string("missing mandatory seed '") + seed + "'");

  PipelineConfig c;
  try {
    auto str = [&](const char* key, std::string& field) {
      if (j.contains(key)) field = j.at(key).get<std::string>();
    };
    auto list = [&](const char* key) {
      std::vector<std::string> out;
      const auto& v = j.at(key);
      if (v.is_string()) {
        out = config_value_from_string(key, v.get<std::string>()).get<std::vector<std::string>>();
      } else {
        for (const auto& x : v) out.push_back(x.is_string() ? x.get<std::string>() : x.dump());
      }
      return out;
    };
    str("patents", c.patents);
    str("links", c.links);
    str("citations", c.citations);
    if (j.contains("delimiter")) {
      const char d = detail::parse_delimiter(j.at("delimiter").get<std::string>());
      c.patent_schema.delimiter = c.link_schema.delimiter = c.citation_schema.delimiter = d;
    }
    str("col_patent_id", c.patent_schema.patent_id);
    str("col_grant_date", c.patent_schema.grant_date);
    str("col_application_date", c.patent_schema.application_date);
    str("col_main_class", c.patent_schema.main_class);
    str("col_assignee_id", c.patent_schema.assignee_id);
    str("col_link_patent_id", c.link_schema.patent_id);
    str("col_inventor_id", c.link_schema.inventor_id);
    str("col_citing_id", c.citation_schema.citing_id);
    str("col_cited_id", c.citation_schema.cited_id);
    if (j.contains("classes")) {
      auto v = list("classes");
      c.classes = {v.begin(), v.end()};
    }
    if (j.contains("year_from")) c.years.first = j.at("year_from").get<int>();
    if (j.contains("year_to")) c.years.last = j.at("year_to").get<int>();
    if (j.contains("detectors")) {
      c.detectors.clear();
      for (const auto& name : list("detectors")) c.detectors.push_back(parse_algorithm(name));
    }
    if (j.contains("walk_steps")) c.walk_steps = j.at("walk_steps").get<std::size_t>();
    if (j.contains("infomap_trials")) c.infomap_trials = j.at("infomap_trials").get<std::size_t>();
    c.detect_seed = j.at("detect_seed").get<std::uint64_t>();
    c.subsample_seed = j.at("subsample_seed").get<std::uint64_t>();
    c.control_seed = j.at("control_seed").get<std::uint64_t>();
    if (j.contains("ari_runs")) c.ari_runs = j.at("ari_runs").get<std::size_t>();
    if (j.contains("window_months")) c.window_months = j.at("window_months").get<double>();
    if (j.contains("bin_width")) c.bin_width = j.at("bin_width").get<double>();
    if (j.contains("subsample_k")) c.subsample_k = j.at("subsample_k").get<std::size_t>();
    if (j.contains("subsample_reps")) c.subsample_reps = j.at("subsample_reps").get<std::size_t>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("exclude_self_zero_bin")) c.exclude_self_zero_bin = j.at("exclude_self_zero_bin").get<bool>();
    if (j.contains("tie_rule")) c.tie_rule = parse_tie_rule(j.at("tie_rule").get<std::string>());
    if (j.contains("workers")) c.workers = j.at("workers").get<unsigned>();
    str("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.walk_steps == 0) throw ConfigError("walk_steps must be positive");
  if (!(c.bin_width > 0.0)) throw ConfigError("bin_width must be positive");
  if (c.years.first > c.years.last) throw ConfigError("year_from exceeds year_to");
  if (c.detectors.empty()) throw ConfigError("no detectors configured");
  return c;
}

inline json config_to_json(const PipelineConfig& c) {
  json j;
  j["patents"] = c.patents;
  j["links"] = c.links;
  j["citations"] = c.citations;
  j["delimiter"] = c.patent_schema.delimiter == '\t' ? "tab" : "comma";
  j["col_patent_id"] = c.patent_schema.patent_id;
  j["col_grant_date"] = c.patent_schema.grant_date;
  j["col_application_date"] = c.patent_schema.application_date;
  j["col_main_class"] = c.patent_schema.main_class;
  j["col_assignee_id"] = c.patent_schema.assignee_id;
  j["col_link_patent_id"] = c.link_schema.patent_id;
  j["col_inventor_id"] = c.link_schema.inventor_id;
  j["col_citing_id"] = c.citation_schema.citing_id;
  j["col_cited_id"] = c.citation_schema.cited_id;
  j["classes"] = std::vector<std::string>(c.classes.begin(), c.classes.end());
  j["year_from"] = c.years.first;
  j["year_to"] = c.years.last;
  json dets = json::array();
  for (auto a : c.detectors) dets.push_back(std::string(algorithm_name(a)));
  j["detectors"] = dets;
  j["walk_steps"] = c.walk_steps;
  j["infomap_trials"] = c.infomap_trials;
  j["detect_seed"] = c.detect_seed;
  j["subsample_seed"] = c.subsample_seed;
  j["control_seed"] = c.control_seed;
  j["ari_runs"] = c.ari_runs;
  j["window_months"] = c.window_months;
  j["bin_width"] = c.bin_width;
  j["subsample_k"] = c.subsample_k;
  j["subsample_reps"] = c.subsample_reps;
  j["alpha"] = c.alpha;
  j["exclude_self_zero_bin"] = c.exclude_self_zero_bin;
  j["tie_rule"] = std::string(tie_rule_name(c.tie_rule));
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  return j;
}

inline json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void save_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  auto out = detail::open_for_write(path.string());
  out << j.dump(2) << '\n';
}

// Error raised by a pipeline stage, tagged with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& kind, const std::string& what)
      : Error(kind, "[" + stage + "] " + kind + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Output layout under config.output_dir.
struct BundleLayout {
  fs::path root;
  fs::path ingest() const { return root / "ingest"; }
  fs::path graph() const { return root / "graph"; }
  fs::path partitions() const { return root / "partitions"; }
  fs::path citations() const { return root / "citations"; }
  fs::path stats() const { return root / "stats"; }
  fs::path control() const { return root / "control"; }
  fs::path partition_file(Algorithm a) const { return partitions() / (std::string(algorithm_name(a)) + ".tsv"); }
};

// Shared inputs loaded from the ingest stage outputs.
struct IngestedData {
  std::vector<PatentRecord> cohort;
  PatentTable universe;
  std::vector<InventorLink> links;
  InventorMap inventors_of;
  std::vector<CitationEvent> events;
};

inline IngestedData load_ingested(const BundleLayout& layout) {
  IngestedData d;
  d.cohort = load_patents((layout.ingest() / "cohort.tsv").string());
  d.universe = PatentTable(load_patents((layout.ingest() / "universe.tsv").string()));
  d.links = load_links((layout.ingest() / "links.tsv").string());
  d.inventors_of = inventors_by_patent(d.links);
  d.events = load_events((layout.ingest() / "events.tsv").string());
  return d;
}

inline WeightedGraph load_lcc(const BundleLayout& layout) {
  return read_edge_list((layout.graph() / "lcc.tsv").string(), read_node_list((layout.graph() / "lcc_nodes.txt").string()));
}

// Stage `ingest`: load inputs, filter the cohort, keep the patents, links and
// dated citations relevant to it.
inline json run_ingest(const PipelineConfig& config) {
  BundleLayout layout{config.output_dir};
  fs::create_directories(layout.ingest());
  auto all = load_patents(config.patents, config.patent_schema);
  auto links = load_links(config.links, config.link_schema);
  auto citations = load_citations(config.citations, config.citation_schema);
  auto cohort = filter_cohort(all, config.classes, config.years);

  std::unordered_set<std::string> cohort_ids;
  for (const auto& p : cohort) cohort_ids.insert(p.patent_id);
  std::vector<CitationRecord> to_cohort;
  for (const auto& c : citations)
    if (cohort_ids.contains(c.cited_id)) to_cohort.push_back(c);
  PatentTable table(std::move(all));
  auto resolved = resolve_citation_events(to_cohort, table);

  std::unordered_set<std::string> relevant(cohort_ids);
  for (const auto& e : resolved.events) relevant.insert(e.citing_id);
  std::vector<PatentRecord> universe;
  for (const auto& p : table.records())
    if (relevant.contains(p.patent_id)) universe.push_back(p);
  std::vector<InventorLink> kept_links;
  for (const auto& l : links)
    if (relevant.contains(l.patent_id)) kept_links.push_back(l);

  write_patents((layout.ingest() / "cohort.tsv").string(), cohort);
  write_patents((layout.ingest() / "universe.tsv").string(), universe);
  write_links((layout.ingest() / "links.tsv").string(), kept_links);
  write_events((layout.ingest() / "events.tsv").string(), resolved.events);
  json summary = {
      {"patents_loaded", table.size()},
      {"links_loaded", links.size()},
      {"citations_loaded", citations.size()},
      {"cohort_patents", cohort.size()},
      {"citations_to_cohort", to_cohort.size()},
      {"events", resolved.events.size()},
      {"dropped_unresolvable", resolved.dropped},
  };
  save_json(layout.ingest() / "ingest.json", summary);
  return summary;
}

// Stage `project`: bipartite network, weighted projection, LCC.
inline json run_project(const PipelineConfig& config) {
  BundleLayout layout{config.output_dir};
  fs::create_directories(layout.graph());
  auto cohort = load_patents((layout.ingest() / "cohort.tsv").string());
  auto links = load_links((layout.ingest() / "links.tsv").string());
  auto bipartite = build_bipartite(cohort, links);
  auto graph = project(bipartite);
  auto components = connected_components(graph);
  auto lcc = largest_component(graph);

  write_edge_list((layout.graph() / "coinventor.tsv").string(), graph);
  write_node_list((layout.graph() / "coinventor_nodes.txt").string(), graph);
  write_edge_list((layout.graph() / "lcc.tsv").string(), lcc);
  write_node_list((layout.graph() / "lcc_nodes.txt").string(), lcc);
  write_graphml((layout.graph() / "lcc.graphml").string(), lcc);

  auto composition = composition_by_attribute(lcc.nodes(), inventor_assignees(cohort, links));
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [label, share] : composition.shares) ranked.emplace_back(-share, label);
  std::sort(ranked.begin(), ranked.end());
  json top = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(10, ranked.size()); ++i)
    top.push_back({{"assignee", ranked[i].second}, {"share", -ranked[i].first}});

  json summary = {
      {"cohort_patents", bipartite.patents.size()},
      {"inventors", graph.node_count()},
      {"edges", graph.edge_count()},
      {"total_weight", graph.total_weight()},
      {"components", components.count()},
      {"lcc_nodes", lcc.node_count()},
      {"lcc_edges", lcc.edge_count()},
      {"lcc_fraction", graph.node_count() ? static_cast<double>(lcc.node_count()) / graph.node_count() : 0.0},
      {"links_outside_cohort", bipartite.excluded_links},
      {"lcc_top_assignees", top},
      {"lcc_unassigned_share", composition.unlabeled},
  };
  save_json(layout.graph() / "graph.json", summary);
  return summary;
}

inline json partition_sidecar(const WeightedGraph& graph, const Partition& p, const PipelineConfig& config) {
  json j = {
      {"algorithm", p.algorithm},
      {"seed", p.seed},
      {"communities", p.community_count},
      {"largest", p.largest_size()},
      {"nodes", p.size()},
      {"parameters", {{"walk_steps", config.walk_steps}, {"infomap_trials", config.infomap_trials}}},
      {"metadata", p.metadata},
  };
  j["modularity"] = graph.total_weight() > 0.0 ? json(modularity(graph, p)) : json(nullptr);
  j["map_equation"] = graph.total_weight() > 0.0 ? json(map_equation(graph, p)) : json(nullptr);
  return j;
}

// Stage `detect`: one partition per configured detector plus the mean
// pairwise ARI over `ari_runs` seeded runs.
inline json run_detect(const PipelineConfig& config, const std::vector<Algorithm>& algorithms) {
  BundleLayout layout{config.output_dir};
  fs::create_directories(layout.partitions());
  const auto lcc = load_lcc(layout);
  auto job = [&](Algorithm a) {
    auto part = detect(lcc, a, config.detect_seed, config.detect_options());
    auto sidecar = partition_sidecar(lcc, part, config);
    const bool stochastic = a == Algorithm::louvain || a == Algorithm::labelprop || a == Algorithm::infomap;
    std::vector<Partition> runs{part};
    if (stochastic)
      for (std::size_t r = 1; r < config.ari_runs; ++r)
        runs.push_back(detect(lcc, a, config.detect_seed + r, config.detect_options()));
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < runs.size(); ++i)
      for (std::size_t k = i + 1; k < runs.size(); ++k, ++pairs) sum += adjusted_rand_index(runs[i], runs[k]).value;
    sidecar["self_ari"] = pairs ? sum / static_cast<double>(pairs) : 1.0;
    sidecar["self_ari_runs"] = runs.size();
    write_partition(layout.partition_file(a).string(), lcc, part);
    save_json(layout.partition_file(a).replace_extension(".json"), sidecar);
    return sidecar;
  };
  json out = json::object();
  if (config.workers <= 1) {
    for (auto a : algorithms) out[std::string(algorithm_name(a))] = job(a);
  } else {
    std::vector<std::pair<Algorithm, std::future<json>>> jobs;
    for (auto a : algorithms) jobs.emplace_back(a, std::async(std::launch::async, job, a));
    for (auto& [a, f] : jobs) out[std::string(algorithm_name(a))] = f.get();
  }
  return out;
}

// Partition-independent first-citation sets shared by classify and control.
struct CitationContext {
  IngestedData data;
  WeightedGraph lcc;
  std::unordered_set<std::string> lcc_inventors;
  std::vector<std::string> lcc_patents;  // cohort patents with an LCC inventor
  std::size_t cohort_first_cited = 0;
  std::size_t lcc_first_cited = 0;
  std::vector<FirstCitation> by_lcc_inventors;  // unclassified
};

inline CitationContext build_citation_context(const PipelineConfig& config) {
  BundleLayout layout{config.output_dir};
  CitationContext ctx;
  ctx.data = load_ingested(layout);
  ctx.lcc = load_lcc(layout);
  ctx.lcc_inventors.insert(ctx.lcc.nodes().begin(), ctx.lcc.nodes().end());
  std::vector<std::string> cohort_ids;
  for (const auto& p : ctx.data.cohort) {
    cohort_ids.push_back(p.patent_id);
    auto it = ctx.data.inventors_of.find(p.patent_id);
    if (it == ctx.data.inventors_of.end()) continue;
    if (std::any_of(it->second.begin(), it->second.end(), [&](const auto& i) { return ctx.lcc_inventors.contains(i); }))
      ctx.lcc_patents.push_back(p.patent_id);
  }
  ctx.cohort_first_cited = first_citations(cohort_ids, ctx.data.events, ctx.data.universe, ctx.data.inventors_of,
                                           nullptr, config.window_months)
                               .size();
  ctx.lcc_first_cited = first_citations(ctx.lcc_patents, ctx.data.events, ctx.data.universe, ctx.data.inventors_of,
                                        nullptr, config.window_months)
                            .size();
  ctx.by_lcc_inventors = first_citations(ctx.lcc_patents, ctx.data.events, ctx.data.universe, ctx.data.inventors_of,
                                         &ctx.lcc_inventors, config.window_months);
  return ctx;
}

inline std::vector<FirstCitation> classify_all(const CitationContext& ctx, const Partition& partition, TieRule rule) {
  auto membership = membership_map(ctx.lcc, partition);
  auto fcs = ctx.by_lcc_inventors;
  for (auto& fc : fcs) classify(fc, ctx.data.inventors_of, ctx.lcc_inventors, membership, rule);
  return fcs;
}

inline json summary_json(const CohortCitationSummary& s) {
  return {
      {"lcc_associated_patents", s.lcc_associated_patents},
      {"lcc_first_cited_within_window", s.first_cited_within_window},
      {"first_cited_by_lcc_inventors", s.first_cited_by_lcc_inventors},
      {"self", s.self},
      {"in_community", s.in_community},
      {"out_of_community", s.out_of_community},
  };
}

// Stage `classify`: first citations typed under each detector's partition.
inline json run_classify(const PipelineConfig& config, const std::vector<Algorithm>& algorithms) {
  BundleLayout layout{config.output_dir};
  fs::create_directories(layout.citations());
  auto ctx = build_citation_context(config);
  std::size_t cohort_inventors = 0;
  {
    std::unordered_set<std::string> inv;
    std::unordered_set<std::string> cohort_ids;
    for (const auto& p : ctx.data.cohort) cohort_ids.insert(p.patent_id);
    for (const auto& l : ctx.data.links)
      if (cohort_ids.contains(l.patent_id)) inv.insert(l.inventor_id);
    cohort_inventors = inv.size();
  }
  json table2 = {
      {"cohort_patents", ctx.data.cohort.size()},
      {"cohort_inventors", cohort_inventors},
      {"cohort_first_cited_within_window", ctx.cohort_first_cited},
      {"lcc_inventors", ctx.lcc.node_count()},
      {"lcc_associated_patents", ctx.lcc_patents.size()},
      {"lcc_first_cited_within_window", ctx.lcc_first_cited},
      {"first_cited_by_lcc_inventors", ctx.by_lcc_inventors.size()},
  };
  json out = json::object();
  for (auto a : algorithms) {
    const auto name = std::string(algorithm_name(a));
    auto partition = read_partition(layout.partition_file(a).string(), ctx.lcc);
    auto fcs = classify_all(ctx, partition, config.tie_rule);
    write_first_citations((layout.citations() / (name + ".csv")).string(), fcs);
    auto summary = summarize(fcs, ctx.lcc_patents.size(), ctx.lcc_first_cited);
    table2["self_first"] = summary.self;
    auto j = summary_json(summary);
    j["tie_rule"] = std::string(tie_rule_name(config.tie_rule));
    j["tied_first_citations"] = std::count_if(fcs.begin(), fcs.end(), [](const auto& f) { return f.candidates.size() > 1; });
    save_json(layout.citations() / (name + ".json"), j);
    out[name] = j;
  }
  save_json(layout.citations() / "table2.json", table2);
  out["table2"] = table2;
  return out;
}

inline json stats_json(const SummaryStats& s) {
  json j = {{"mean", s.mean}, {"median", s.median}, {"mode", s.mode}};
  if (s.mean_error) j["mean_error"] = *s.mean_error;
  if (s.median_error) j["median_error"] = *s.median_error;
  if (s.mode_error) j["mode_error"] = *s.mode_error;
  return j;
}

inline json fit_json(const LagHistogram& h, const LogNormalFitOptions& options) {
  try {
    auto fit = fit_lognormal(h, options);
    return {
        {"shift", fit.shift},         {"mu", fit.mu},
        {"sigma", fit.sigma},         {"shift_error", fit.shift_error},
        {"mu_error", fit.mu_error},   {"sigma_error", fit.sigma_error},
        {"ssr", fit.ssr},             {"bins_used", fit.bins_used},
        {"iterations", fit.iterations}, {"derived", stats_json(fit.derived())},
    };
  } catch (const Error& e) {
    return {{"error", e.kind()}, {"message", e.what()}};
  }
}

template <typename F>
json guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return {{"error", e.kind()}, {"message", e.what()}};
  }
}

inline json welch_json(const WelchResult& w, bool with_shift = false) {
  json j = {{"t", w.t}, {"df", w.degrees_of_freedom}, {"p", w.p_value}};
  if (with_shift) j["shift"] = w.shift;
  return j;
}

// Lag statistics for one classified first-citation set.
inline json lag_statistics(std::span<const FirstCitation> fcs, const PipelineConfig& config,
                           const fs::path& histogram_dir) {
  fs::create_directories(histogram_dir);
  json out = json::object();
  std::map<CitationCategory, std::vector<double>> lags;
  for (auto c : {CitationCategory::self, CitationCategory::in_community, CitationCategory::out_of_community})
    lags[c] = lags_of(fcs, c);

  for (const auto& [category, values] : lags) {
    const auto name = std::string(category_name(category));
    json j = {{"count", values.size()}};
    if (!values.empty()) {
      auto hist = histogram(values, config.bin_width);
      write_histogram_csv((histogram_dir / ("hist_" + name + ".csv")).string(), hist);
      j["raw"] = stats_json(raw_summary(values, config.bin_width));
      LogNormalFitOptions options;
      options.exclude_zero_bin = category == CitationCategory::self && config.exclude_self_zero_bin;
      j["fit"] = fit_json(hist, options);
      if (category == CitationCategory::self) {
        for (auto mode : {ZeroPeakMode::interpolate, ZeroPeakMode::remove}) {
          const char* label = mode == ZeroPeakMode::interpolate ? "zero_peak_interpolated" : "zero_peak_removed";
          j[label] = guarded([&] { return fit_json(adjust_zero_peak(hist, mode), {}); });
        }
      }
    }
    out[name] = j;
  }

  const auto& in = lags[CitationCategory::in_community];
  const auto& outc = lags[CitationCategory::out_of_community];
  // Out minus in: positive t means in-community citations arrive earlier.
  out["welch_full"] = guarded([&] { return welch_json(welch_t(outc, in)); });
  out["welch_log_shift"] = guarded([&] { return welch_json(log_shift_welch(outc, in), true); });
  out["welch_subsample"] = guarded([&] {
    auto r = subsample_welch(outc, in, config.subsample_k, config.subsample_reps, config.alpha, config.subsample_seed,
                             config.workers);
    return json{{"mean_t", r.mean_t},
                {"fraction_significant", r.fraction_significant},
                {"k", config.subsample_k},
                {"reps", config.subsample_reps},
                {"alpha", config.alpha}};
  });
  return out;
}

// Stage `stats`: histograms, raw summaries, fits and Welch tests per detector.
inline json run_stats(const PipelineConfig& config, const std::vector<Algorithm>& algorithms) {
  BundleLayout layout{config.output_dir};
  json out = json::object();
  for (auto a : algorithms) {
    const auto name = std::string(algorithm_name(a));
    auto fcs = read_first_citations((layout.citations() / (name + ".csv")).string());
    auto j = lag_statistics(fcs, config, layout.stats() / name);
    save_json(layout.stats() / (name + ".json"), j);
    out[name] = j;
  }
  return out;
}

// Stage `control`: reclassification under a partition randomized within its
// community-size structure.
inline json control_report(const CitationContext& ctx, const Partition& original, const PipelineConfig& config) {
  auto randomized = randomize_within_structure(original, config.control_seed);
  auto base = classify_all(ctx, original, config.tie_rule);
  auto shuffled = classify_all(ctx, randomized, config.tie_rule);
  auto before = summarize(base, ctx.lcc_patents.size(), ctx.lcc_first_cited);
  auto after = summarize(shuffled, ctx.lcc_patents.size(), ctx.lcc_first_cited);
  const auto in = lags_of(shuffled, CitationCategory::in_community);
  const auto outc = lags_of(shuffled, CitationCategory::out_of_community);
  json j = {
      {"seed", config.control_seed},
      {"ari_vs_original", adjusted_rand_index(original, randomized).value},
      {"original_in_community", before.in_community},
      {"randomized_in_community", after.in_community},
      {"randomized_out_of_community", after.out_of_community},
      {"randomized_self", after.self},
  };
  j["in_raw"] = guarded([&] { return stats_json(raw_summary(in, config.bin_width)); });
  j["out_raw"] = guarded([&] { return stats_json(raw_summary(outc, config.bin_width)); });
  j["welch_full"] = guarded([&] { return welch_json(welch_t(outc, in)); });
  return j;
}

inline json run_control(const PipelineConfig& config, const std::vector<Algorithm>& algorithms,
                        const std::optional<fs::path>& partition_override = std::nullopt) {
  BundleLayout layout{config.output_dir};
  fs::create_directories(layout.control());
  auto ctx = build_citation_context(config);
  json out = json::object();
  for (auto a : algorithms) {
    const auto name = std::string(algorithm_name(a));
    const auto path = partition_override ? *partition_override : layout.partition_file(a);
    auto original = read_partition(path.string(), ctx.lcc);
    auto j = control_report(ctx, original, config);
    write_partition((layout.control() / (name + "_randomized.tsv")).string(), ctx.lcc,
                    randomize_within_structure(original, config.control_seed));
    save_json(layout.control() / (name + ".json"), j);
    out[name] = j;
  }
  return out;
}

inline json read_or_null(const fs::path& p) { return fs::exists(p) ? load_json(p) : json(nullptr); }

// Stage `report`: assembles the summary tables from stage outputs.
inline json run_report(const PipelineConfig& config) {
  BundleLayout layout{config.output_dir};
  const auto lcc = load_lcc(layout);
  json table3 = json::object();
  std::vector<std::pair<std::string, Partition>> parts;
  for (auto a : config.detectors) {
    const auto name = std::string(algorithm_name(a));
    auto sidecar = read_or_null(layout.partition_file(a).replace_extension(".json"));
    auto cites = read_or_null(layout.citations() / (name + ".json"));
    json row = {{"communities", sidecar.is_null() ? json(nullptr) : sidecar["communities"]},
                {"largest", sidecar.is_null() ? json(nullptr) : sidecar["largest"]},
                {"self_ari", sidecar.is_null() ? json(nullptr) : sidecar["self_ari"]},
                {"in_community_first_citations", cites.is_null() ? json(nullptr) : cites["in_community"]}};
    table3[name] = row;
    if (fs::exists(layout.partition_file(a))) parts.emplace_back(name, read_partition(layout.partition_file(a).string(), lcc));
  }
  for (const auto& [a, pa] : parts) {
    json ari = json::object();
    for (const auto& [b, pb] : parts) ari[b] = a == b ? table3[a]["self_ari"] : json(adjusted_rand_index(pa, pb).value);
    table3[a]["ari"] = ari;
  }

  json table4 = json::object(), table5 = json::object();
  for (auto a : config.detectors) {
    const auto name = std::string(algorithm_name(a));
    auto s = read_or_null(layout.stats() / (name + ".json"));
    if (s.is_null()) continue;
    table4[name] = {{"in", {{"raw", s["in"].value("raw", json(nullptr))}, {"fit", s["in"].value("fit", json(nullptr))}}},
                    {"out", {{"raw", s["out"].value("raw", json(nullptr))}, {"fit", s["out"].value("fit", json(nullptr))}}},
                    {"welch_full", s["welch_full"]},
                    {"welch_log_shift", s["welch_log_shift"]},
                    {"welch_subsample", s["welch_subsample"]}};
    table5[name] = {{"raw", s["self"].value("raw", json(nullptr))},
                    {"zero_peak_interpolated", s["self"].value("zero_peak_interpolated", json(nullptr))},
                    {"zero_peak_removed", s["self"].value("zero_peak_removed", json(nullptr))}};
  }
  json table2 = read_or_null(layout.citations() / "table2.json");
  json graph = read_or_null(layout.graph() / "graph.json");
  if (!table2.is_null() && !graph.is_null()) table2["lcc_fraction"] = graph["lcc_fraction"];

  json control = json::object();
  for (auto a : config.detectors) {
    auto c = read_or_null(layout.control() / (std::string(algorithm_name(a)) + ".json"));
    if (!c.is_null()) control[std::string(algorithm_name(a))] = c;
  }

  save_json(layout.root / "table2.json", table2);
  save_json(layout.root / "table3.json", table3);
  save_json(layout.root / "table4.json", table4);
  save_json(layout.root / "table5.json", table5);
  save_json(layout.root / "control.json", control);
  json manifest = {{"config", config_to_json(config)},
                   {"seeds", {{"detect", config.detect_seed},
                              {"subsample", config.subsample_seed},
                              {"control", config.control_seed}}},
                   {"outputs", {"table2.json", "table3.json", "table4.json", "table5.json", "control.json"}}};
  save_json(layout.root / "manifest.json", manifest);
  return {{"table2", table2}, {"table3", table3}, {"table4", table4}, {"table5", table5}, {"control", control}};
}

// Runs one stage, converting library errors into stage-tagged errors and
// leaving a FAILED marker next to whatever outputs were already written.
template <typename F>
auto run_stage(const PipelineConfig& config, const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    const std::string kind = err ? err->kind() : "Error";
    fs::create_directories(config.output_dir);
    auto marker = detail::open_for_write((fs::path(config.output_dir) / "FAILED").string());
    marker << stage << '\t' << kind << '\t' << e.what() << '\n';
    throw StageError(stage, kind, e.what());
  }
}

inline void check_inputs(const PipelineConfig& config) {
  for (const auto& p : {config.patents, config.links, config.citations})
    if (p.empty() || !fs::exists(p)) throw ConfigError("input file not found: '" + p + "'");
}

// ingest -> project -> detect -> classify -> stats -> control -> report.
inline json run_pipeline(const PipelineConfig& config) {
  fs::create_directories(config.output_dir);
  fs::remove(fs::path(config.output_dir) / "FAILED");
  run_stage(config, "config", [&] {
    check_inputs(config);
    return 0;
  });
  run_stage(config, "ingest", [&] { return run_ingest(config); });
  run_stage(config, "project", [&] { return run_project(config); });
  run_stage(config, "detect", [&] { return run_detect(config, config.detectors); });
  run_stage(config, "classify", [&] { return run_classify(config, config.detectors); });
  run_stage(config, "stats", [&] { return run_stats(config, config.detectors); });
  run_stage(config, "control", [&] { return run_control(config, config.detectors); });
  return run_stage(config, "report", [&] { return run_report(config); });
}

}  // namespace coinv
