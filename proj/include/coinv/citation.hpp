#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "coinv/error.hpp"
#include "coinv/graph_io.hpp"
#include "coinv/ingest.hpp"
#include "coinv/partition.hpp"

namespace coinv {

inline constexpr double kDaysPerMonth = 30.4375;  // 365.25 / 12

enum class CitationCategory { self, in_community, out_of_community };

inline std::string_view category_name(CitationCategory c) {
  switch (c) {
    case CitationCategory::self: return "self";
    case CitationCategory::in_community: return "in";
    case CitationCategory::out_of_community: return "out";
  }
  return "?";
}

inline CitationCategory parse_category(std::string_view s) {
  if (s == "self") return CitationCategory::self;
  if (s == "in") return CitationCategory::in_community;
  if (s == "out") return CitationCategory::out_of_community;
  throw ConfigError("unknown citation category '" + std::string(s) + "'");
}

// How to pick among citing patents sharing the earliest citation date.
enum class TieRule {
  priority,    // self > in-community > out-of-community, then lowest citing key
  lowest_key,  // lowest citing key only
};

inline TieRule parse_tie_rule(std::string_view s) {
  if (s == "priority") return TieRule::priority;
  if (s == "lowest_key") return TieRule::lowest_key;
  throw ConfigError("unknown tie_rule '" + std::string(s) + "' (expected priority or lowest_key)");
}

inline std::string_view tie_rule_name(TieRule r) {
  return r == TieRule::priority ? "priority" : "lowest_key";
}

// Signed months from the cited patent's grant to the citing application.
inline double lag_months(Date cited_grant, Date citation_date) {
  return static_cast<double>((citation_date - cited_grant).count()) / kDaysPerMonth;
}

inline double compute_lag(const PatentRecord& cited, const PatentRecord& citing) {
  return lag_months(cited.grant_date, citing.application_date);
}

struct FirstCitation {
  std::string cited_patent;
  std::string citing_patent;
  double lag_months = 0.0;
  std::optional<CitationCategory> category;
  // Every citing patent dated on the earliest qualifying day, ascending.
  // citing_patent is the front until classification resolves ties.
  std::vector<std::string> candidates;
};

// For each cited patent, the earliest qualifying citation: within
// `window_months` of grant and, when `lcc_inventors` is given, from a citing
// patent with at least one inventor in that set. Patents with no qualifying
// citation are omitted. Output follows the order of `cited_patents`.
inline std::vector<FirstCitation> first_citations(std::span<const std::string> cited_patents,
                                                  std::span<const CitationEvent> events,
                                                  const PatentTable& patents, const InventorMap& inventors_of,
                                                  const std::unordered_set<std::string>* lcc_inventors,
                                                  double window_months = 120.0) {
  std::unordered_map<std::string, std::vector<const CitationEvent*>> by_cited;
  std::unordered_set<std::string_view> wanted(cited_patents.begin(), cited_patents.end());
  for (const auto& e : events)
    if (wanted.contains(e.cited_id)) by_cited[e.cited_id].push_back(&e);

  auto qualifies_citer = [&](const std::string& citing) {
    if (lcc_inventors == nullptr) return true;
    auto it = inventors_of.find(citing);
    if (it == inventors_of.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const std::string& inv) { return lcc_inventors->contains(inv); });
  };

  std::vector<FirstCitation> out;
  for (const auto& cited_id : cited_patents) {
    auto it = by_cited.find(cited_id);
    if (it == by_cited.end()) continue;
    const auto* cited = patents.find(cited_id);
    if (cited == nullptr) throw UnknownNode("cited patent " + cited_id + " has no record");
    std::optional<Date> earliest;
    std::vector<std::string> at_earliest;
    for (const auto* e : it->second) {
      if (lag_months(cited->grant_date, e->date) > window_months) continue;
      if (!qualifies_citer(e->citing_id)) continue;
      if (!earliest || e->date < *earliest) {
        earliest = e->date;
        at_earliest.assign(1, e->citing_id);
      } else if (e->date == *earliest) {
        at_earliest.push_back(e->citing_id);
      }
    }
    if (!earliest) continue;
    std::sort(at_earliest.begin(), at_earliest.end());
    at_earliest.erase(std::unique(at_earliest.begin(), at_earliest.end()), at_earliest.end());
    FirstCitation fc;
    fc.cited_patent = cited_id;
    fc.citing_patent = at_earliest.front();
    fc.lag_months = lag_months(cited->grant_date, *earliest);
    fc.candidates = std::move(at_earliest);
    out.push_back(std::move(fc));
  }
  return out;
}

// Inventor -> community for the nodes of an LCC graph under a partition.
inline std::unordered_map<std::string, CommunityId> membership_map(const WeightedGraph& lcc,
                                                                   const Partition& partition) {
  if (partition.size() != lcc.node_count()) throw NodeSetMismatch("partition does not cover the LCC");
  std::unordered_map<std::string, CommunityId> out;
  out.reserve(lcc.node_count());
  for (NodeIndex i = 0; i < lcc.node_count(); ++i) out.emplace(lcc.key(i), partition.membership[i]);
  return out;
}

// Category of a citation from `citing` to `cited`. Self compares full inventor
// lists; community comparison only considers inventors in the LCC.
inline CitationCategory classify_pair(const std::string& cited, const std::string& citing,
                                      const InventorMap& inventors_of,
                                      const std::unordered_set<std::string>& lcc_inventors,
                                      const std::unordered_map<std::string, CommunityId>& membership) {
  static const std::vector<std::string> none;
  auto lookup = [&](const std::string& p) -> const std::vector<std::string>& {
    auto it = inventors_of.find(p);
    return it == inventors_of.end() ? none : it->second;
  };
  const auto& a = lookup(cited);
  const auto& b = lookup(citing);
  for (const auto& x : b)
    if (std::binary_search(a.begin(), a.end(), x)) return CitationCategory::self;

  auto communities = [&](const std::vector<std::string>& inventors) {
    std::vector<CommunityId> out;
    for (const auto& inv : inventors) {
      if (!lcc_inventors.contains(inv)) continue;
      auto it = membership.find(inv);
      if (it == membership.end()) throw UnpartitionedNode(inv);
      out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto ca = communities(a);
  for (auto c : communities(b))
    if (std::binary_search(ca.begin(), ca.end(), c)) return CitationCategory::in_community;
  return CitationCategory::out_of_community;
}

// Classifies a first citation, resolving date ties per `tie_rule`; updates
// fc.citing_patent and fc.category and returns the category.
inline CitationCategory classify(FirstCitation& fc, const InventorMap& inventors_of,
                                 const std::unordered_set<std::string>& lcc_inventors,
                                 const std::unordered_map<std::string, CommunityId>& membership,
                                 TieRule tie_rule = TieRule::priority) {
  if (fc.candidates.empty()) fc.candidates.push_back(fc.citing_patent);
  std::optional<CitationCategory> best;
  std::string chosen;
  for (const auto& citing : fc.candidates) {
    auto c = classify_pair(fc.cited_patent, citing, inventors_of, lcc_inventors, membership);
    if (!best || (tie_rule == TieRule::priority && c < *best)) {
      best = c;
      chosen = citing;
    }
    if (tie_rule == TieRule::lowest_key) break;
  }
  fc.citing_patent = chosen;
  fc.category = best;
  return *best;
}

struct CohortCitationSummary {
  std::size_t lcc_associated_patents = 0;
  std::size_t first_cited_within_window = 0;
  std::size_t first_cited_by_lcc_inventors = 0;
  std::size_t self = 0;
  std::size_t in_community = 0;
  std::size_t out_of_community = 0;
};

// Counts over classified first citations (restricted to LCC citers) plus the
// two cohort-level counts the caller computed upstream.
inline CohortCitationSummary summarize(std::span<const FirstCitation> by_lcc_inventors,
                                       std::size_t lcc_associated_patents,
                                       std::size_t first_cited_within_window) {
  CohortCitationSummary s;
  s.lcc_associated_patents = lcc_associated_patents;
  s.first_cited_within_window = first_cited_within_window;
  s.first_cited_by_lcc_inventors = by_lcc_inventors.size();
  for (const auto& fc : by_lcc_inventors) {
    if (!fc.category) throw ConfigError("summarize: unclassified first citation for " + fc.cited_patent);
    switch (*fc.category) {
      case CitationCategory::self: ++s.self; break;
      case CitationCategory::in_community: ++s.in_community; break;
      case CitationCategory::out_of_community: ++s.out_of_community; break;
    }
  }
  return s;
}

inline std::vector<double> lags_of(std::span<const FirstCitation> fcs, CitationCategory category) {
  std::vector<double> out;
  for (const auto& fc : fcs)
    if (fc.category == category) out.push_back(fc.lag_months);
  return out;
}

// `cited_id,citing_id,lag_months,category`
inline void write_first_citations(const std::string& path, std::span<const FirstCitation> fcs) {
  auto out = detail::open_for_write(path);
  out << "cited_id,citing_id,lag_months,category\n";
  for (const auto& fc : fcs) {
    out << fc.cited_patent << ',' << fc.citing_patent << ',' << format_real(fc.lag_months) << ','
        << (fc.category ? category_name(*fc.category) : std::string_view{}) << '\n';
  }
}

inline std::vector<FirstCitation> read_first_citations(const std::string& path) {
  detail::DelimitedReader reader(path, ',');
  const auto c_cited = reader.require("cited_id");
  const auto c_citing = reader.require("citing_id");
  const auto c_lag = reader.require("lag_months");
  const auto c_cat = reader.require("category");
  std::vector<FirstCitation> out;
  while (reader.next()) {
    FirstCitation fc;
    fc.cited_patent = std::string(reader.field(c_cited));
    fc.citing_patent = std::string(reader.field(c_citing));
    try {
      fc.lag_months = std::stod(std::string(reader.field(c_lag)));
    } catch (const std::exception&) {
      throw MalformedRow(reader.line(), "bad lag");
    }
    auto cat = reader.field(c_cat);
    if (!cat.empty()) fc.category = parse_category(cat);
    fc.candidates = {fc.citing_patent};
    out.push_back(std::move(fc));
  }
  return out;
}

}  // namespace coinv
