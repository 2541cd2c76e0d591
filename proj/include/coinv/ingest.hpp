#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "coinv/error.hpp"

namespace coinv {

using Date = std::chrono::sys_days;

// Strict ISO-8601 calendar date (YYYY-MM-DD). Sentinels such as 0000-00-00
// and impossible dates are rejected.
inline std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int value = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) return std::nullopt;
    return value;
  };
  auto y = field(0, 4), m = field(5, 2), d = field(8, 2);
  if (!y || !m || !d || *y == 0) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{*y},
                                  std::chrono::month{static_cast<unsigned>(*m)},
                                  std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline std::string format_date(Date date) {
  std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline int year_of(Date date) {
  return static_cast<int>(std::chrono::year_month_day{date}.year());
}

struct PatentRecord {
  std::string patent_id;
  Date grant_date;
  Date application_date;
  std::string main_class;
  std::optional<std::string> assignee_id;

  friend bool operator==(const PatentRecord&, const PatentRecord&) = default;
};

struct InventorLink {
  std::string patent_id;
  std::string inventor_id;

  friend bool operator==(const InventorLink&, const InventorLink&) = default;
  friend auto operator<=>(const InventorLink&, const InventorLink&) = default;
};

struct CitationRecord {
  std::string citing_id;
  std::string cited_id;

  friend bool operator==(const CitationRecord&, const CitationRecord&) = default;
  friend auto operator<=>(const CitationRecord&, const CitationRecord&) = default;
};

// A citation dated by the application date of the citing patent.
struct CitationEvent {
  std::string citing_id;
  std::string cited_id;
  Date date;

  friend bool operator==(const CitationEvent&, const CitationEvent&) = default;
};

// Column names for each input table. The assignee column is optional: when
// absent from the header every record gets no assignee.
struct PatentSchema {
  char delimiter = '\t';
  std::string patent_id = "patent_id";
  std::string grant_date = "grant_date";
  std::string application_date = "application_date";
  std::string main_class = "main_class";
  std::string assignee_id = "assignee_id";
};

struct LinkSchema {
  char delimiter = '\t';
  std::string patent_id = "patent_id";
  std::string inventor_id = "inventor_id";
};

struct CitationSchema {
  char delimiter = '\t';
  std::string citing_id = "citing_id";
  std::string cited_id = "cited_id";
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

// Line-oriented reader for a delimited file with a header row.
class DelimitedReader {
 public:
  DelimitedReader(const std::string& path, char delim) : in_(path), delim_(delim) {
    if (!in_) throw IoError("cannot open " + path);
    std::string header;
    if (!std::getline(in_, header)) throw MalformedRow(1, "missing header row in " + path);
    line_no_ = 1;
    auto cols = split(trim(header), delim_);
    for (std::size_t i = 0; i < cols.size(); ++i) header_.emplace(std::string(trim(cols[i])), i);
  }

  std::size_t require(const std::string& column) const {
    auto it = header_.find(column);
    if (it == header_.end()) throw MalformedRow(1, "header lacks column '" + column + "'");
    return it->second;
  }

  std::optional<std::size_t> optional_column(const std::string& column) const {
    auto it = header_.find(column);
    if (it == header_.end()) return std::nullopt;
    return it->second;
  }

  // Advances to the next non-blank row; false at end of file.
  bool next() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (trim(line_).empty()) continue;
      fields_ = split(trim(line_), delim_);
      for (auto& f : fields_) f = trim(f);
      return true;
    }
    return false;
  }

  std::string_view field(std::size_t column) const {
    if (column >= fields_.size()) throw MalformedRow(line_no_, "missing field");
    return fields_[column];
  }

  std::size_t line() const { return line_no_; }

 private:
  std::ifstream in_;
  char delim_;
  std::unordered_map<std::string, std::size_t> header_;
  std::string line_;
  std::vector<std::string_view> fields_;
  std::size_t line_no_ = 0;
};

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace detail

// Loaded patents, sorted by patent_id.
inline std::vector<PatentRecord> load_patents(const std::string& path,
                                              const PatentSchema& schema = {}) {
  detail::DelimitedReader reader(path, schema.delimiter);
  const auto c_id = reader.require(schema.patent_id);
  const auto c_grant = reader.require(schema.grant_date);
  const auto c_app = reader.require(schema.application_date);
  const auto c_class = reader.require(schema.main_class);
  const auto c_assignee = reader.optional_column(schema.assignee_id);

  std::vector<PatentRecord> out;
  std::unordered_set<std::string> seen;
  while (reader.next()) {
    PatentRecord rec;
    rec.patent_id = std::string(reader.field(c_id));
    if (rec.patent_id.empty()) throw MalformedRow(reader.line(), "empty patent id");
    auto grant = parse_date(reader.field(c_grant));
    auto app = parse_date(reader.field(c_app));
    if (!grant) throw MalformedRow(reader.line(), "bad grant date");
    if (!app) throw MalformedRow(reader.line(), "bad application date");
    if (*app > *grant) throw MalformedRow(reader.line(), "application date after grant date");
    rec.grant_date = *grant;
    rec.application_date = *app;
    rec.main_class = std::string(reader.field(c_class));
    if (rec.main_class.empty()) throw MalformedRow(reader.line(), "empty class");
    if (c_assignee) {
      auto a = reader.field(*c_assignee);
      if (!a.empty()) rec.assignee_id = std::string(a);
    }
    if (!seen.insert(rec.patent_id).second) {
      throw DuplicateId("patent " + rec.patent_id + " repeated at line " +
                        std::to_string(reader.line()));
    }
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.patent_id < b.patent_id; });
  return out;
}

inline void write_patents(const std::string& path, std::span<const PatentRecord> patents,
                          const PatentSchema& schema = {}) {
  auto out = detail::open_for_write(path);
  const char d = schema.delimiter;
  out << schema.patent_id << d << schema.grant_date << d << schema.application_date << d
      << schema.main_class << d << schema.assignee_id << '\n';
  for (const auto& p : patents) {
    out << p.patent_id << d << format_date(p.grant_date) << d
        << format_date(p.application_date) << d << p.main_class << d
        << p.assignee_id.value_or("") << '\n';
  }
}

// Loaded links, sorted by (patent_id, inventor_id).
inline std::vector<InventorLink> load_links(const std::string& path, const LinkSchema& schema = {}) {
  detail::DelimitedReader reader(path, schema.delimiter);
  const auto c_patent = reader.require(schema.patent_id);
  const auto c_inventor = reader.require(schema.inventor_id);
  std::vector<InventorLink> out;
  while (reader.next()) {
    InventorLink link{std::string(reader.field(c_patent)), std::string(reader.field(c_inventor))};
    if (link.patent_id.empty() || link.inventor_id.empty())
      throw MalformedRow(reader.line(), "empty key");
    out.push_back(std::move(link));
  }
  std::sort(out.begin(), out.end());
  auto dup = std::adjacent_find(out.begin(), out.end());
  if (dup != out.end())
    throw DuplicateId("inventor link " + dup->patent_id + "/" + dup->inventor_id + " repeated");
  return out;
}

inline void write_links(const std::string& path, std::span<const InventorLink> links,
                        const LinkSchema& schema = {}) {
  auto out = detail::open_for_write(path);
  out << schema.patent_id << schema.delimiter << schema.inventor_id << '\n';
  for (const auto& l : links) out << l.patent_id << schema.delimiter << l.inventor_id << '\n';
}

// Loaded citations, sorted by (citing_id, cited_id).
inline std::vector<CitationRecord> load_citations(const std::string& path,
                                                  const CitationSchema& schema = {}) {
  detail::DelimitedReader reader(path, schema.delimiter);
  const auto c_citing = reader.require(schema.citing_id);
  const auto c_cited = reader.require(schema.cited_id);
  std::vector<CitationRecord> out;
  while (reader.next()) {
    CitationRecord rec{std::string(reader.field(c_citing)), std::string(reader.field(c_cited))};
    if (rec.citing_id.empty() || rec.cited_id.empty())
      throw MalformedRow(reader.line(), "empty key");
    if (rec.citing_id == rec.cited_id) throw MalformedRow(reader.line(), "patent cites itself");
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end());
  auto dup = std::adjacent_find(out.begin(), out.end());
  if (dup != out.end())
    throw DuplicateId("citation " + dup->citing_id + "->" + dup->cited_id + " repeated");
  return out;
}

inline void write_citations(const std::string& path, std::span<const CitationRecord> citations,
                            const CitationSchema& schema = {}) {
  auto out = detail::open_for_write(path);
  out << schema.citing_id << schema.delimiter << schema.cited_id << '\n';
  for (const auto& c : citations) out << c.citing_id << schema.delimiter << c.cited_id << '\n';
}

struct YearRange {
  int first = 0;
  int last = 0;
  bool contains(int year) const { return year >= first && year <= last; }
};

// Records whose main class is listed and whose grant year falls in `years`.
// Only the main (primary) class is matched.
inline std::vector<PatentRecord> filter_cohort(std::span<const PatentRecord> patents,
                                               const std::set<std::string>& classes,
                                               YearRange years) {
  std::vector<PatentRecord> out;
  for (const auto& p : patents) {
    if (classes.contains(p.main_class) && years.contains(year_of(p.grant_date)))
      out.push_back(p);
  }
  return out;
}

// Lookup by patent id over a record set.
class PatentTable {
 public:
  PatentTable() = default;
  explicit PatentTable(std::vector<PatentRecord> records) : records_(std::move(records)) {
    index_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (!index_.emplace(records_[i].patent_id, i).second)
        throw DuplicateId("patent " + records_[i].patent_id + " repeated");
    }
  }

  const PatentRecord* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &records_[it->second];
  }
  std::span<const PatentRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<PatentRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ResolvedCitations {
  std::vector<CitationEvent> events;
  std::size_t dropped = 0;
};

// Dates each citation by the citing patent's application date. Citations
// whose citing patent is unknown are dropped and counted.
inline ResolvedCitations resolve_citation_events(std::span<const CitationRecord> citations,
                                                 const PatentTable& all_patents) {
  ResolvedCitations out;
  out.events.reserve(citations.size());
  for (const auto& c : citations) {
    const auto* citing = all_patents.find(c.citing_id);
    if (citing == nullptr) {
      ++out.dropped;
      continue;
    }
    out.events.push_back({c.citing_id, c.cited_id, citing->application_date});
  }
  return out;
}

inline void write_events(const std::string& path, std::span<const CitationEvent> events) {
  auto out = detail::open_for_write(path);
  out << "citing_id\tcited_id\tcitation_date\n";
  for (const auto& e : events)
    out << e.citing_id << '\t' << e.cited_id << '\t' << format_date(e.date) << '\n';
}

inline std::vector<CitationEvent> load_events(const std::string& path) {
  detail::DelimitedReader reader(path, '\t');
  const auto c_citing = reader.require("citing_id");
  const auto c_cited = reader.require("cited_id");
  const auto c_date = reader.require("citation_date");
  std::vector<CitationEvent> out;
  while (reader.next()) {
    auto date = parse_date(reader.field(c_date));
    if (!date) throw MalformedRow(reader.line(), "bad citation date");
    out.push_back({std::string(reader.field(c_citing)), std::string(reader.field(c_cited)), *date});
  }
  return out;
}

// patent id -> sorted inventor ids, over the given links.
using InventorMap = std::unordered_map<std::string, std::vector<std::string>>;

inline InventorMap inventors_by_patent(std::span<const InventorLink> links) {
  InventorMap out;
  for (const auto& l : links) out[l.patent_id].push_back(l.inventor_id);
  for (auto& [_, v] : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace coinv
