#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "techprox/corpus_ingest.hpp"
#include "techprox/util.hpp"

using namespace techprox;

namespace {

TechnologyCatalog one_tech_catalog() {
    TechnologyCatalog cat;
    cat.technologies.push_back({"T1", "Tech one"});
    cat.range = MonthRange{{2020, 1}, {2020, 12}};
    return cat;
}

RawWork raw(std::string id, std::string date, std::vector<std::string> refs,
            std::vector<std::pair<std::string, double>> concepts,
            std::optional<std::string> title = std::string("t")) {
    RawWork w;
    w.work_id = std::move(id);
    w.publication_date = std::move(date);
    w.referenced_works = std::move(refs);
    w.concepts = std::move(concepts);
    w.title = std::move(title);
    return w;
}

}  // namespace

TEST_SUITE("corpus_ingest") {

TEST_CASE("abstract reconstruction joins words by ascending position") {
    CHECK(reconstruct_abstract({{"hello", {0}}, {"world", {1}}}) == "hello world");
    CHECK(reconstruct_abstract({}) == "");
    CHECK(reconstruct_abstract({{"a", {0, 2}}, {"b", {1}}}) == "a b a");
}

TEST_CASE("abstract reconstruction rejects malformed position maps") {
    CHECK_THROWS_WITH_AS(reconstruct_abstract({{"x", {1}}, {"y", {1}}}),
                         doctest::Contains("position 1"), DataError);
    CHECK_THROWS_AS(reconstruct_abstract({{"x", {-1}}}), DataError);
}

TEST_CASE("refinement drops and counts by rule on a hand-built fixture") {
    const TechnologyCatalog cat = one_tech_catalog();
    std::vector<RawWork> works;
    for (int i = 0; i < 4; ++i)  // four without references
        works.push_back(raw("Wnr" + std::to_string(i), "2020-03-10", {}, {{"T1", 0.5}}));
    works.push_back(raw("Wzc", "2020-03-10", {"Wx"}, {{"T1", 0.0}}));  // zero score
    works.push_back(raw("WD", "2020-04-10", {"Wx"}, {{"T1", 0.5}}, std::nullopt));
    works.push_back(raw("WD", "2020-04-10", {"Wx"}, {{"T1", 0.7}}, "the keeper"));
    works.push_back(raw("Wa", "2020-05-10", {"Wx"}, {{"T1", 0.5}}));
    works.push_back(raw("Wb", "2020-06-10", {"Wx"}, {{"T1", 0.5}}));
    works.push_back(raw("Wc", "2020-07-10", {"Wx"}, {{"T1", 0.5}}));
    REQUIRE(works.size() == 10);

    auto [corpus, stats] = refine_corpus(works, cat, 1);
    CHECK(corpus.size() == 4);
    CHECK(stats.input == 10);
    CHECK(stats.no_refs == 4);
    CHECK(stats.no_concepts == 1);
    CHECK(stats.dupes_merged == 1);
    CHECK(stats.bad_date == 0);
    CHECK(stats.out_of_range == 0);
    CHECK(stats.survivors == 4);
    CHECK(stats.total_dropped() + stats.survivors == stats.input);

    // The duplicate with more populated fields wins.
    for (const auto& rec : corpus)
        if (rec.work_id == "WD") {
            CHECK(rec.title == "the keeper");
            CHECK(rec.tech_scores.at("T1") == 0.7);
        }
}

TEST_CASE("duplicate records of equal completeness keep the first seen") {
    const TechnologyCatalog cat = one_tech_catalog();
    std::vector<RawWork> works;
    works.push_back(raw("WD", "2020-04-10", {"Wx"}, {{"T1", 0.5}}, "first"));
    works.push_back(raw("WD", "2020-04-10", {"Wx"}, {{"T1", 0.9}}, "second"));
    auto [corpus, stats] = refine_corpus(works, cat, 1);
    REQUIRE(corpus.size() == 1);
    CHECK(corpus[0].title == "first");
    CHECK(stats.dupes_merged == 1);
}

TEST_CASE("unparseable and out-of-range dates are dropped and counted, never fatal") {
    const TechnologyCatalog cat = one_tech_catalog();
    std::vector<RawWork> works;
    works.push_back(raw("W1", "not-a-date", {"Wx"}, {{"T1", 0.5}}));
    works.push_back(raw("W2", "2019-12-31", {"Wx"}, {{"T1", 0.5}}));
    works.push_back(raw("W3", "2021-01-01", {"Wx"}, {{"T1", 0.5}}));
    works.push_back(raw("W4", "2020-02-02", {"Wx"}, {{"T1", 0.5}}));
    auto [corpus, stats] = refine_corpus(works, cat, 1);
    CHECK(stats.bad_date == 1);
    CHECK(stats.out_of_range == 2);
    REQUIRE(corpus.size() == 1);
    CHECK(corpus[0].work_id == "W4");
}

TEST_CASE("concepts outside the catalog never keep a record alive") {
    const TechnologyCatalog cat = one_tech_catalog();
    std::vector<RawWork> works;
    works.push_back(raw("W1", "2020-02-02", {"Wx"}, {{"C999", 0.9}}));
    auto [corpus, stats] = refine_corpus(works, cat, 1);
    CHECK(corpus.empty());
    CHECK(stats.no_concepts == 1);
}

TEST_CASE("the relatedness threshold is strict") {
    TechnologyCatalog cat = one_tech_catalog();
    std::vector<RawWork> works;
    works.push_back(raw("W1", "2020-02-02", {"Wx"}, {{"T1", 0.3}}));
    RefineOptions opts;
    opts.relatedness_threshold = 0.3;  // score must be strictly greater
    auto [corpus, stats] = refine_corpus(works, cat, 1, opts);
    CHECK(corpus.empty());
    CHECK(stats.no_concepts == 1);

    opts.relatedness_threshold = 0.29;
    auto [corpus2, stats2] = refine_corpus(works, cat, 1, opts);
    CHECK(corpus2.size() == 1);
}

TEST_CASE("january-first records are redistributed within their year, others untouched") {
    const TechnologyCatalog cat = one_tech_catalog();
    std::vector<RawWork> works;
    for (int i = 0; i < 100; ++i)
        works.push_back(raw("WJ" + std::to_string(i), "2020-01-01", {"Wx"}, {{"T1", 0.5}}));
    works.push_back(raw("WK", "2020-01-15", {"Wx"}, {{"T1", 0.5}}));

    auto [corpus, stats] = refine_corpus(works, cat, 7);
    REQUIRE(corpus.size() == 101);
    CHECK(stats.redistributed_from_january == 100);

    std::set<int> months_hit;
    for (const auto& rec : corpus) {
        CHECK(rec.month.year == 2020);
        CHECK(rec.month.month >= 1);
        CHECK(rec.month.month <= 12);
        if (rec.work_id == "WK")
            CHECK(rec.month.month == 1);  // mid-January stays put
        else
            months_hit.insert(rec.month.month);
    }
    // The hash spread should cover most of the year for 100 records.
    CHECK(months_hit.size() >= 8);

    // Same seed, same outcome; byte-level determinism.
    auto [corpus2, stats2] = refine_corpus(works, cat, 7);
    CHECK(corpus == corpus2);
}

TEST_CASE("redistribution is the identity when no record is dated january first") {
    const TechnologyCatalog cat = one_tech_catalog();
    std::vector<RawWork> works;
    works.push_back(raw("W1", "2020-01-20", {"Wx"}, {{"T1", 0.5}}));
    works.push_back(raw("W2", "2020-06-06", {"Wx"}, {{"T1", 0.5}}));
    auto [corpus, stats] = refine_corpus(works, cat, 99);
    CHECK(stats.redistributed_from_january == 0);
    CHECK(corpus[0].month == MonthKey{2020, 1});
    CHECK(corpus[1].month == MonthKey{2020, 6});
}

TEST_CASE("refinement conserves every input record on random fixtures") {
    std::mt19937_64 eng(2024);
    TechnologyCatalog cat = one_tech_catalog();
    cat.technologies.push_back({"T2", "Tech two"});
    for (int round = 0; round < 50; ++round) {
        std::vector<RawWork> works;
        const int n = 1 + static_cast<int>(testutil::pick(eng, 30));
        for (int i = 0; i < n; ++i) {
            const double dice = rng::unit(eng);
            std::string id = "W" + std::to_string(testutil::pick(eng, 20));  // collisions on purpose
            std::string date = dice < 0.1   ? "garbage"
                               : dice < 0.2 ? "2019-05-05"
                               : dice < 0.3 ? "2020-01-01"
                                            : "2020-0" + std::to_string(1 + testutil::pick(eng, 9)) +
                                                  "-11";
            std::vector<std::string> refs;
            if (rng::unit(eng) < 0.7) refs.push_back("Wx");
            std::vector<std::pair<std::string, double>> concepts;
            if (rng::unit(eng) < 0.8)
                concepts.emplace_back(rng::unit(eng) < 0.8 ? "T1" : "C-rogue",
                                      rng::unit(eng) < 0.1 ? 0.0 : 0.5);
            works.push_back(raw(std::move(id), std::move(date), std::move(refs),
                                std::move(concepts)));
        }
        auto [corpus, stats] = refine_corpus(works, cat, round);
        CHECK(stats.input == static_cast<long>(works.size()));
        CHECK(stats.total_dropped() + stats.survivors == stats.input);
        CHECK(stats.survivors == static_cast<long>(corpus.size()));
        std::set<std::string> ids;
        for (const auto& rec : corpus) {
            CHECK(ids.insert(rec.work_id).second);  // dedup actually deduplicated
            CHECK_FALSE(rec.referenced_works.empty());
            CHECK_FALSE(rec.tech_scores.empty());
            CHECK(cat.range.contains(rec.month));
        }
    }
}

TEST_CASE("refinement is idempotent on already-refined content") {
    TechnologyCatalog cat = one_tech_catalog();
    // Express the first pass's survivors as raw works dated mid-month (the
    // original day is consumed by refinement) and refine again.
    std::vector<RawWork> works;
    std::vector<RawWork> round1;
    for (int i = 0; i < 12; ++i)
        round1.push_back(raw("W" + std::to_string(i),
                             "2020-0" + std::to_string(1 + i % 9) + "-15", {"Wx"},
                             {{"T1", 0.25 + 0.05 * i}}));
    auto [first, stats1] = refine_corpus(round1, cat, 5);
    for (const auto& rec : first) {
        std::vector<std::pair<std::string, double>> concepts(rec.tech_scores.begin(),
                                                             rec.tech_scores.end());
        works.push_back(raw(rec.work_id, format_month(rec.month) + "-15", rec.referenced_works,
                            std::move(concepts), rec.title));
    }
    auto [second, stats2] = refine_corpus(works, cat, 5);
    REQUIRE(second.size() == first.size());
    CHECK(stats2.total_dropped() == 0);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(second[i].work_id == first[i].work_id);
        CHECK(second[i].month == first[i].month);
        CHECK(second[i].tech_scores == first[i].tech_scores);
    }
}

TEST_CASE("month buckets partition the corpus") {
    std::vector<PaperRecord> corpus;
    for (int i = 0; i < 3; ++i) {
        PaperRecord p;
        p.work_id = "A" + std::to_string(i);
        p.month = {2017, 5};
        corpus.push_back(p);
    }
    PaperRecord q;
    q.work_id = "B";
    q.month = {2017, 6};
    corpus.push_back(q);

    auto buckets = month_bucket(corpus);
    REQUIRE(buckets.size() == 2);
    CHECK(buckets.at({2017, 5}).size() == 3);
    CHECK(buckets.at({2017, 6}).size() == 1);

    CHECK(month_bucket({}).empty());

    std::mt19937_64 eng(3);
    for (int round = 0; round < 20; ++round) {
        auto gen = testutil::random_corpus(eng);
        auto parts = month_bucket(gen.corpus);
        std::size_t total = 0;
        std::set<const PaperRecord*> seen;
        for (const auto& [month, members] : parts)
            for (const auto* p : members) {
                CHECK(p->month == month);
                CHECK(seen.insert(p).second);
                ++total;
            }
        CHECK(total == gen.corpus.size());
    }
}

TEST_CASE("raw works and refined corpora round-trip through jsonl") {
    testutil::TempDir tmp;
    RawWork w;
    w.work_id = "W42";
    w.title = "A study";
    w.abstract_inverted_index = {{"alpha", {0, 2}}, {"beta", {1}}};
    w.publication_date = "2020-05-06";
    w.author_ids = {"A1", "A2"};
    w.author_names = {"Ada", "Grace"};
    w.referenced_works = {"W1", "W2"};
    w.concepts = {{"T1", 0.5}, {"T2", 0.25}};

    save_raw_works_jsonl(tmp / "works.jsonl", {w});
    auto loaded = load_raw_works_jsonl(tmp / "works.jsonl");
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].work_id == w.work_id);
    CHECK(loaded[0].title == w.title);
    CHECK(loaded[0].abstract_inverted_index == w.abstract_inverted_index);
    CHECK(loaded[0].publication_date == w.publication_date);
    CHECK(loaded[0].author_ids == w.author_ids);
    CHECK(loaded[0].referenced_works == w.referenced_works);
    CHECK(loaded[0].concepts == w.concepts);

    std::mt19937_64 eng(17);
    auto gen = testutil::random_corpus(eng);
    save_corpus_jsonl(tmp / "corpus.jsonl", gen.corpus);
    CHECK(load_corpus_jsonl(tmp / "corpus.jsonl") == gen.corpus);
}

TEST_CASE("raw work parsing rejects broken lines with their line number") {
    CHECK_THROWS_WITH_AS(raw_work_from_json_line("{not json", 3), doctest::Contains("line 3"),
                         DataError);
    CHECK_THROWS_AS(raw_work_from_json_line(R"({"title":"no id"})", 1), DataError);
    CHECK_THROWS_AS(
        raw_work_from_json_line(R"({"id":"W1","concepts":[{"id":"T1","score":1.5}]})", 1),
        DataError);
}

}  // TEST_SUITE
