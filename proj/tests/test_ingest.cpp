#include <gtest/gtest.h>

#include "coinv/ingest.hpp"
#include "oracles.hpp"

using namespace coinv;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

PatentRecord patent(const std::string& id, const std::string& grant, const std::string& app,
                    const std::string& cls = "257") {
  return {id, *parse_date(grant), *parse_date(app), cls, std::nullopt};
}

}  // namespace

TEST(Dates, ParsesIsoDates) {
  auto d = parse_date("1996-03-01");
  ASSERT_TRUE(d);
  EXPECT_EQ(format_date(*d), "1996-03-01");
  EXPECT_EQ(year_of(*d), 1996);
}

TEST(Dates, RejectsSentinelsAndJunk) {
  for (const char* bad : {"0000-00-00", "1996-02-30", "1996-13-01", "96-01-01", "1996/01/01", "", "1996-01-01x"})
    EXPECT_FALSE(parse_date(bad)) << bad;
}

TEST(LoadPatents, HeaderOnlyGivesEmptySet) {
  TempDir dir("ingest_empty");
  write_text(dir.file("p.tsv"), "patent_id\tgrant_date\tapplication_date\tmain_class\n");
  EXPECT_TRUE(load_patents(dir.file("p.tsv")).empty());
}

TEST(LoadPatents, GrantBeforeApplicationIsMalformed) {
  TempDir dir("ingest_order");
  write_text(dir.file("p.tsv"),
             "patent_id\tgrant_date\tapplication_date\tmain_class\n"
             "A\t1996-01-01\t1997-01-01\t257\n");
  EXPECT_THROW(load_patents(dir.file("p.tsv")), MalformedRow);
}

TEST(LoadPatents, SentinelDateIsMalformedWithLineNumber) {
  TempDir dir("ingest_sentinel");
  write_text(dir.file("p.tsv"),
             "patent_id\tgrant_date\tapplication_date\tmain_class\n"
             "A\t1996-01-01\t1995-01-01\t257\n"
             "B\t0000-00-00\t1995-01-01\t257\n");
  try {
    load_patents(dir.file("p.tsv"));
    FAIL() << "expected MalformedRow";
  } catch (const MalformedRow& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadPatents, DuplicateIdRejected) {
  TempDir dir("ingest_dup");
  write_text(dir.file("p.tsv"),
             "patent_id\tgrant_date\tapplication_date\tmain_class\n"
             "A\t1996-01-01\t1995-01-01\t257\n"
             "A\t1997-01-01\t1995-01-01\t257\n");
  EXPECT_THROW(load_patents(dir.file("p.tsv")), DuplicateId);
}

TEST(LoadPatents, MissingColumnAndFileReported) {
  TempDir dir("ingest_cols");
  write_text(dir.file("p.tsv"), "patent_id\tgrant_date\n");
  EXPECT_THROW(load_patents(dir.file("p.tsv")), Error);
  EXPECT_THROW(load_patents(dir.file("absent.tsv")), IoError);
}

TEST(LoadPatents, CommaSchemaWithRenamedColumns) {
  TempDir dir("ingest_schema");
  write_text(dir.file("p.csv"),
             "id,granted,filed,uspc,firm\n"
             "B,1998-05-05,1996-01-02,438,IBM\n"
             "A,1996-01-01,1995-01-01,257,\n");
  PatentSchema s{',', "id", "granted", "filed", "uspc", "firm"};
  auto ps = load_patents(dir.file("p.csv"), s);
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[0].patent_id, "A");
  EXPECT_FALSE(ps[0].assignee_id);
  EXPECT_EQ(ps[1].assignee_id, "IBM");
  EXPECT_EQ(ps[1].main_class, "438");
}

TEST(LoadPatents, RoundTripIsIdentical) {
  TempDir dir("ingest_roundtrip");
  std::vector<PatentRecord> ps{patent("A", "1996-01-01", "1995-01-01"), patent("B", "1999-12-31", "1999-12-31", "326")};
  ps[1].assignee_id = "X";
  write_patents(dir.file("p.tsv"), ps);
  auto back = load_patents(dir.file("p.tsv"));
  ASSERT_EQ(back.size(), ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(back[i].patent_id, ps[i].patent_id);
    EXPECT_EQ(back[i].grant_date, ps[i].grant_date);
    EXPECT_EQ(back[i].application_date, ps[i].application_date);
    EXPECT_EQ(back[i].main_class, ps[i].main_class);
    EXPECT_EQ(back[i].assignee_id, ps[i].assignee_id);
  }
}

TEST(LoadLinksAndCitations, DuplicatesAndSelfCitations) {
  TempDir dir("ingest_links");
  write_text(dir.file("l.tsv"), "patent_id\tinventor_id\nA\tX\nA\tX\n");
  EXPECT_THROW(load_links(dir.file("l.tsv")), DuplicateId);
  write_text(dir.file("c.tsv"), "citing_id\tcited_id\nA\tA\n");
  EXPECT_THROW(load_citations(dir.file("c.tsv")), MalformedRow);
  write_text(dir.file("c2.tsv"), "citing_id\tcited_id\nB\tA\nC\tA\n");
  EXPECT_EQ(load_citations(dir.file("c2.tsv")).size(), 2u);
}

TEST(FilterCohort, EmptyClassSetGivesEmpty) {
  std::vector<PatentRecord> ps{patent("A", "1996-06-01", "1995-01-01")};
  EXPECT_TRUE(filter_cohort(ps, {}, {1995, 1999}).empty());
}

TEST(FilterCohort, SinglePatentIdentity) {
  std::vector<PatentRecord> ps{patent("A", "1996-06-01", "1995-01-01")};
  auto out = filter_cohort(ps, {"257"}, {1995, 1999});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].patent_id, "A");
}

TEST(FilterCohort, YearBoundsInclusiveAndIdempotent) {
  std::vector<PatentRecord> ps{
      patent("A", "1994-12-31", "1994-01-01"), patent("B", "1995-01-01", "1994-01-01"),
      patent("C", "1999-12-31", "1998-01-01"), patent("D", "2000-01-01", "1998-01-01"),
      patent("E", "1997-01-01", "1996-01-01", "999"),
  };
  auto once = filter_cohort(ps, {"257", "326", "438"}, {1995, 1999});
  ASSERT_EQ(once.size(), 2u);
  EXPECT_EQ(once[0].patent_id, "B");
  EXPECT_EQ(once[1].patent_id, "C");
  auto twice = filter_cohort(once, {"257", "326", "438"}, {1995, 1999});
  ASSERT_EQ(twice.size(), once.size());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(twice[i].patent_id, once[i].patent_id);
}

TEST(ResolveCitations, DatesByCitingApplication) {
  PatentTable table({patent("A", "1995-06-01", "1994-01-01"), patent("B", "1997-01-01", "1996-03-01")});
  std::vector<CitationRecord> cs{{"B", "A"}};
  auto r = resolve_citation_events(cs, table);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(format_date(r.events[0].date), "1996-03-01");
  EXPECT_EQ(r.dropped, 0u);
}

TEST(ResolveCitations, UnknownCitingDropped) {
  PatentTable table({patent("A", "1995-06-01", "1994-01-01")});
  std::vector<CitationRecord> cs{{"Z", "A"}};
  auto r = resolve_citation_events(cs, table);
  EXPECT_TRUE(r.events.empty());
  EXPECT_EQ(r.dropped, 1u);
}

TEST(ResolveCitations, FiveCitationsOneUnresolvable) {
  PatentTable table({patent("A", "1995-06-01", "1994-01-01"), patent("B", "1996-01-01", "1995-01-01"),
                     patent("C", "1997-01-01", "1996-01-01"), patent("D", "1998-01-01", "1997-01-01")});
  std::vector<CitationRecord> cs{{"B", "A"}, {"C", "A"}, {"C", "B"}, {"D", "A"}, {"Q", "A"}};
  auto r = resolve_citation_events(cs, table);
  EXPECT_EQ(r.events.size(), 4u);
  EXPECT_EQ(r.events.size() + r.dropped, cs.size());
}

TEST(Events, RoundTrip) {
  TempDir dir("ingest_events");
  std::vector<CitationEvent> es{{"B", "A", *parse_date("1996-03-01")}, {"C", "A", *parse_date("1990-01-31")}};
  write_events(dir.file("e.tsv"), es);
  auto back = load_events(dir.file("e.tsv"));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].citing_id, "C");
  EXPECT_EQ(back[1].date, es[1].date);
}
