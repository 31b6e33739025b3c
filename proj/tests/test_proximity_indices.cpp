#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "techprox/author_impact.hpp"
#include "techprox/corpus_ingest.hpp"
#include "techprox/proximity_indices.hpp"

using namespace techprox;

namespace {

PaperRecord paper(std::string id, std::map<std::string, double> scores,
                  std::vector<KeywordAssignment> keywords = {},
                  std::vector<std::string> authors = {},
                  std::vector<std::string> refs = {}) {
    PaperRecord p;
    p.work_id = std::move(id);
    p.month = {2020, 1};
    p.tech_scores = std::move(scores);
    p.keyword_assignments = std::move(keywords);
    p.authors = std::move(authors);
    p.referenced_works = std::move(refs);
    return p;
}

std::vector<const PaperRecord*> as_bucket(const std::vector<PaperRecord>& papers) {
    std::vector<const PaperRecord*> bucket;
    for (const auto& p : papers) bucket.push_back(&p);
    return bucket;
}

}  // namespace

TEST_SUITE("proximity_indices") {

TEST_CASE("keyword index worked example: one bridging keyword across two papers") {
    std::vector<PaperRecord> papers;
    papers.push_back(paper("P1", {{"t1", 0.6}}, {{"hash", 0.5}}));
    papers.push_back(paper("P2", {{"t2", 0.4}}, {{"hash", 0.3}}));
    const auto ik = keyword_index(as_bucket(papers), {"t1", "t2"});
    REQUIRE(ik.has_value());
    // N = (1+1)/2, C = (0.5+0.3)/2, A = ((0.6+0)/2 + (0+0.4)/2)/2 -> 1 * 0.4 * 0.25
    CHECK(*ik == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("keyword index absent/zero semantics") {
    std::vector<PaperRecord> one_sided;
    one_sided.push_back(paper("P1", {{"t1", 0.6}}, {{"hash", 0.5}}));
    CHECK_FALSE(keyword_index(as_bucket(one_sided), {"t1", "t2"}).has_value());

    std::vector<PaperRecord> disjoint;
    disjoint.push_back(paper("P1", {{"t1", 0.6}}, {{"hash", 0.5}}));
    disjoint.push_back(paper("P2", {{"t2", 0.4}}, {{"lattice", 0.3}}));
    const auto ik = keyword_index(as_bucket(disjoint), {"t1", "t2"});
    REQUIRE(ik.has_value());
    CHECK(*ik == 0.0);

    CHECK_FALSE(keyword_index({}, {"t1", "t2"}).has_value());
}

TEST_CASE("citation index worked examples") {
    std::vector<PaperRecord> papers;
    papers.push_back(paper("Q1", {{"t2", 0.5}}));
    papers.push_back(paper("P", {{"t1", 0.7}}, {}, {}, {"Q1"}));
    CorpusView view(papers);
    const auto ic = citation_index(view, as_bucket(papers), {"t1", "t2"});
    REQUIRE(ic.has_value());
    CHECK(*ic == doctest::Approx(0.6).epsilon(1e-14));  // (0.7+0.5)/2

    // Two qualifying cited works contribute 0.6 and 0.3.
    std::vector<PaperRecord> multi;
    multi.push_back(paper("Q1", {{"t2", 0.7}}));
    multi.push_back(paper("Q2", {{"t2", 0.1}}));
    multi.push_back(paper("P", {{"t1", 0.5}}, {}, {}, {"Q1", "Q2"}));
    CorpusView view2(multi);
    const auto ic2 = citation_index(view2, as_bucket(multi), {"t1", "t2"});
    REQUIRE(ic2.has_value());
    CHECK(*ic2 == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("citation index absent/zero semantics and unknown references") {
    // No paper related to t1 this month -> the month is missing, not zero.
    std::vector<PaperRecord> no_t1;
    no_t1.push_back(paper("Q1", {{"t2", 0.5}}));
    CorpusView v1(no_t1);
    CHECK_FALSE(citation_index(v1, as_bucket(no_t1), {"t1", "t2"}).has_value());

    // t1 papers exist but nothing cites a t2 paper -> a true zero.
    std::vector<PaperRecord> no_cites;
    no_cites.push_back(paper("P", {{"t1", 0.7}}, {}, {}, {"X-unknown"}));
    CorpusView v2(no_cites);
    const auto ic = citation_index(v2, as_bucket(no_cites), {"t1", "t2"});
    REQUIRE(ic.has_value());
    CHECK(*ic == 0.0);
    CHECK(v2.unknown_refs() == 1);
}

TEST_CASE("collaboration index worked example: one bridging author with h = 2") {
    std::vector<PaperRecord> papers;
    papers.push_back(paper("P1", {{"t1", 0.6}}, {}, {"A"}));
    papers.push_back(paper("P2", {{"t2", 0.4}}, {}, {"A"}));
    HIndexTable table;
    table.variant = {Granularity::Monthly, Accumulation::Incremental};
    table.by_author["A"][monthly_period({2020, 1})] = 2;
    const auto ia = collaboration_index(as_bucket(papers), {"t1", "t2"}, table, {2020, 1});
    REQUIRE(ia.has_value());
    // N = 1, H = 2, A = 0.25.
    CHECK(*ia == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("collaboration index: h = 0 bridges contribute nothing, no bridge is a zero") {
    std::vector<PaperRecord> papers;
    papers.push_back(paper("P1", {{"t1", 0.6}}, {}, {"A"}));
    papers.push_back(paper("P2", {{"t2", 0.4}}, {}, {"A"}));
    HIndexTable empty_table;  // every lookup is 0
    empty_table.variant = {Granularity::Monthly, Accumulation::Incremental};
    const auto ia = collaboration_index(as_bucket(papers), {"t1", "t2"}, empty_table, {2020, 1});
    REQUIRE(ia.has_value());
    CHECK(*ia == 0.0);

    // Both sides populated, but no author spans them.
    std::vector<PaperRecord> split;
    split.push_back(paper("P1", {{"t1", 0.6}}, {}, {"A"}));
    split.push_back(paper("P2", {{"t2", 0.4}}, {}, {"B"}));
    HIndexTable table;
    table.variant = {Granularity::Monthly, Accumulation::Incremental};
    table.by_author["A"][monthly_period({2020, 1})] = 3;
    table.by_author["B"][monthly_period({2020, 1})] = 3;
    const auto none = collaboration_index(as_bucket(split), {"t1", "t2"}, table, {2020, 1});
    REQUIRE(none.has_value());
    CHECK(*none == 0.0);
}

TEST_CASE("halving every attribution score scales the indices' score factors exactly") {
    // Citation: contributions are means of two scores, so the whole index
    // halves. Keyword/collaboration: with a single bridging term, N and C
    // (and H) are score-independent, so the index halves through A.
    std::vector<PaperRecord> papers;
    papers.push_back(paper("Q", {{"t2", 0.5}}));
    papers.push_back(paper("P1", {{"t1", 0.6}}, {{"hash", 0.5}}, {"A"}, {"Q"}));
    papers.push_back(paper("P2", {{"t2", 0.4}}, {{"hash", 0.3}}, {"A"}));
    std::vector<PaperRecord> halved = papers;
    for (auto& p : halved)
        for (auto& [tech, s] : p.tech_scores) s *= 0.5;

    CorpusView view(papers), view_halved(halved);
    HIndexTable table;
    table.variant = {Granularity::Monthly, Accumulation::Incremental};
    table.by_author["A"][monthly_period({2020, 1})] = 2;

    const TechPair pair{"t1", "t2"};
    CHECK(*citation_index(view_halved, as_bucket(halved), pair) ==
          0.5 * *citation_index(view, as_bucket(papers), pair));
    CHECK(*keyword_index(as_bucket(halved), pair) ==
          0.5 * *keyword_index(as_bucket(papers), pair));
    CHECK(*collaboration_index(as_bucket(halved), pair, table, {2020, 1}) ==
          0.5 * *collaboration_index(as_bucket(papers), pair, table, {2020, 1}));
}

TEST_CASE("fresh bridging evidence never decreases a month's index") {
    // New keyword, new author, new citation: each adds a disjoint
    // non-negative term to its index.
    std::vector<PaperRecord> papers;
    papers.push_back(paper("Q", {{"t2", 0.5}}));
    papers.push_back(paper("P1", {{"t1", 0.6}}, {{"hash", 0.5}}, {"A"}, {"Q"}));
    papers.push_back(paper("P2", {{"t2", 0.4}}, {{"hash", 0.3}}, {"A"}));
    HIndexTable table;
    table.variant = {Granularity::Monthly, Accumulation::Incremental};
    table.by_author["A"][monthly_period({2020, 1})] = 2;
    table.by_author["Z"][monthly_period({2020, 1})] = 1;
    const TechPair pair{"t1", "t2"};
    CorpusView view(papers);

    const double ik = *keyword_index(as_bucket(papers), pair);
    const double ia = *collaboration_index(as_bucket(papers), pair, table, {2020, 1});
    const double ic = *citation_index(view, as_bucket(papers), pair);

    auto grown = papers;
    grown.push_back(paper("P3", {{"t1", 0.2}, {"t2", 0.3}}, {{"mesh", 0.9}}, {"Z"}, {"Q"}));
    CorpusView grown_view(grown);
    CHECK(*keyword_index(as_bucket(grown), pair) >= ik);
    CHECK(*collaboration_index(as_bucket(grown), pair, table, {2020, 1}) >= ia);
    CHECK(*citation_index(grown_view, as_bucket(grown), pair) >= ic);
}

TEST_CASE("a 3-technology catalog yields 30 series with symmetric/mirrored kinds") {
    std::mt19937_64 eng(88);
    auto gen = testutil::random_corpus(eng, 15, 3);
    while (gen.catalog.technologies.size() != 3) gen = testutil::random_corpus(eng, 15, 3);

    const HIndexTable incr = build_h_tables(gen.corpus, gen.catalog.range,
                                            {Granularity::Monthly, Accumulation::Incremental});
    const HIndexTable non = build_h_tables(gen.corpus, gen.catalog.range,
                                           {Granularity::Monthly, Accumulation::NonIncremental});
    const auto series = build_all_series(gen.corpus, gen.catalog, incr, non);
    CHECK(series.size() == 30);  // 6 ordered pairs x 5 kinds

    // Index the output for pairwise lookups.
    std::map<std::string, const IndexSeries*> by_id;
    for (const auto& s : series) by_id[series_id(s.pair, s.kind)] = &s;
    const auto at = [&](const std::string& t1, const std::string& t2, IndexKind k) {
        return by_id.at(series_id({t1, t2}, k));
    };

    const std::vector<std::string> ids = {"T1", "T2", "T3"};
    for (const auto& a : ids)
        for (const auto& b : ids) {
            if (a == b) continue;
            for (int m = 0; m < gen.catalog.range.length(); ++m) {
                CHECK(at(a, b, IndexKind::KeywordIK)->values[m] ==
                      at(b, a, IndexKind::KeywordIK)->values[m]);
                CHECK(at(a, b, IndexKind::CollabIncremental)->values[m] ==
                      at(b, a, IndexKind::CollabIncremental)->values[m]);
                CHECK(at(a, b, IndexKind::CollabNonIncremental)->values[m] ==
                      at(b, a, IndexKind::CollabNonIncremental)->values[m]);
                CHECK(at(a, b, IndexKind::CitationRev)->values[m] ==
                      at(b, a, IndexKind::CitationFwd)->values[m]);
            }
        }
}

TEST_CASE("all five kinds match the brute-force oracle on random corpora") {
    std::mt19937_64 eng(1234);
    for (int round = 0; round < 60; ++round) {
        const auto gen = testutil::random_corpus(eng);
        const HIndexTable incr = build_h_tables(gen.corpus, gen.catalog.range,
                                                {Granularity::Monthly, Accumulation::Incremental});
        const HIndexTable non = build_h_tables(
            gen.corpus, gen.catalog.range, {Granularity::Monthly, Accumulation::NonIncremental});
        const auto series = build_all_series(gen.corpus, gen.catalog, incr, non);

        const oracle::HMap o_incr = oracle::h_monthly(gen.corpus, gen.catalog.range, true);
        const oracle::HMap o_non = oracle::h_monthly(gen.corpus, gen.catalog.range, false);
        const auto buckets = month_bucket(gen.corpus);
        static const std::vector<const PaperRecord*> empty_bucket;

        for (const auto& s : series) {
            for (int m = 0; m < gen.catalog.range.length(); ++m) {
                const MonthKey month = gen.catalog.range.at(m);
                auto it = buckets.find(month);
                const auto& bucket = it == buckets.end() ? empty_bucket : it->second;
                const auto expected =
                    oracle::index_value(s.kind, gen.corpus, bucket, s.pair.t1, s.pair.t2, o_incr,
                                        o_non, monthly_period(month));
                const bool match = testutil::close_opt(s.values[m], expected);
                CHECK(match);
                if (s.values[m]) CHECK(*s.values[m] >= 0.0);
            }
        }
    }
}

TEST_CASE("parallel and serial series construction agree bit for bit") {
    std::mt19937_64 eng(555);
    for (int round = 0; round < 10; ++round) {
        const auto gen = testutil::random_corpus(eng);
        const HIndexTable incr = build_h_tables(gen.corpus, gen.catalog.range,
                                                {Granularity::Monthly, Accumulation::Incremental});
        const HIndexTable non = build_h_tables(
            gen.corpus, gen.catalog.range, {Granularity::Monthly, Accumulation::NonIncremental});
        const auto parallel = build_all_series(gen.corpus, gen.catalog, incr, non, true);
        const auto serial = build_all_series(gen.corpus, gen.catalog, incr, non, false);
        REQUIRE(parallel.size() == serial.size());
        for (std::size_t i = 0; i < parallel.size(); ++i)
            CHECK(parallel[i].values == serial[i].values);
    }
}

TEST_CASE("series persistence round-trips values and missing markers") {
    testutil::TempDir tmp;
    std::mt19937_64 eng(777);
    const auto gen = testutil::random_corpus(eng);
    const HIndexTable incr = build_h_tables(gen.corpus, gen.catalog.range,
                                            {Granularity::Monthly, Accumulation::Incremental});
    const HIndexTable non = build_h_tables(gen.corpus, gen.catalog.range,
                                           {Granularity::Monthly, Accumulation::NonIncremental});
    const auto series = build_all_series(gen.corpus, gen.catalog, incr, non);
    save_series_csv(tmp / "series.csv", series, gen.catalog.range);
    const auto reloaded = load_series_csv(tmp / "series.csv", gen.catalog.range);
    REQUIRE(reloaded.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(reloaded[i].pair.t1 == series[i].pair.t1);
        CHECK(reloaded[i].pair.t2 == series[i].pair.t2);
        CHECK(reloaded[i].kind == series[i].kind);
        CHECK(reloaded[i].values == series[i].values);
    }
}

TEST_CASE("kind names round-trip and match the reporting convention") {
    CHECK(std::string(kind_name(IndexKind::CitationFwd)) == "citation_fwd");
    CHECK(std::string(kind_name(IndexKind::CitationRev)) == "citation_rev");
    CHECK(std::string(kind_name(IndexKind::CollabIncremental)) == "collab_incremental");
    CHECK(std::string(kind_name(IndexKind::CollabNonIncremental)) == "collab_non_incremental");
    CHECK(std::string(kind_name(IndexKind::KeywordIK)) == "keyword");
    for (IndexKind k : kAllIndexKinds) CHECK(kind_from_name(kind_name(k)) == k);
    CHECK(series_id({"T1", "T2"}, IndexKind::KeywordIK) == "T1|T2|keyword");
    CHECK_THROWS(kind_from_name("bogus"));
}

}  // TEST_SUITE
