#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "techprox/keyword_annotation.hpp"
#include "techprox/util.hpp"

using namespace techprox;

namespace {

PaperRecord with_text(std::string title, std::string abstract_text = "") {
    PaperRecord p;
    p.work_id = "W1";
    p.title = std::move(title);
    p.abstract_text = std::move(abstract_text);
    return p;
}

}  // namespace

TEST_SUITE("keyword_annotation") {

TEST_CASE("frequency ranking hand case: repeated unigram wins, runner-up at half weight") {
    ExtractorSpec spec;
    spec.top_k = 2;
    const auto out = annotate_fallback(with_text("aes aes cipher"), spec);
    REQUIRE(out.size() == 2);
    CHECK(out[0].keyword == "aes");
    CHECK(out[0].similarity == 1.0);
    CHECK(out[1].keyword == "cipher");
    CHECK(out[1].similarity == 0.5);
}

TEST_CASE("empty text yields an empty assignment list") {
    ExtractorSpec spec;
    CHECK(annotate_fallback(with_text("", ""), spec).empty());
    // Stopwords-only text reduces to nothing as well.
    CHECK(annotate_fallback(with_text("the of and", ""), spec).empty());
}

TEST_CASE("extraction is deterministic and caps at top_k") {
    ExtractorSpec spec;
    spec.top_k = 3;
    const auto a = annotate_fallback(with_text("grid energy grid storage energy grid"), spec);
    const auto b = annotate_fallback(with_text("grid energy grid storage energy grid"), spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].keyword == b[i].keyword);
        CHECK(a[i].similarity == b[i].similarity);
    }
    CHECK(a.size() <= 3);
    CHECK(a[0].similarity == 1.0);
}

TEST_CASE("bigrams over surviving tokens compete with unigrams") {
    ExtractorSpec spec;
    spec.top_k = 10;
    // "quantum key" appears twice as a phrase; every unigram also shows up.
    const auto out =
        annotate_fallback(with_text("quantum key quantum key distribution"), spec);
    bool phrase_found = false;
    for (const auto& ka : out)
        if (ka.keyword == "quantum key") {
            phrase_found = true;
            CHECK(ka.similarity == 1.0);  // tf 2, tied with the top unigrams
        }
    CHECK(phrase_found);
}

TEST_CASE("title and abstract are pooled and case-folded") {
    ExtractorSpec spec;
    spec.top_k = 1;
    const auto out = annotate_fallback(with_text("Lattice", "lattice LATTICE protocol"), spec);
    REQUIRE(out.size() == 1);
    CHECK(out[0].keyword == "lattice");
    CHECK(out[0].similarity == 1.0);
}

TEST_CASE("similarities stay in [0,1] and the leader is exactly 1 on random text") {
    std::mt19937_64 eng(42);
    const std::vector<std::string> pool = {"alpha", "beta",  "gamma", "delta",
                                           "omega", "sigma", "kappa"};
    ExtractorSpec spec;
    for (int round = 0; round < 40; ++round) {
        std::string text;
        const int words = 1 + static_cast<int>(testutil::pick(eng, 30));
        for (int w = 0; w < words; ++w) text += pool[testutil::pick(eng, pool.size())] + " ";
        const auto out = annotate_fallback(with_text(text), spec);
        REQUIRE_FALSE(out.empty());
        CHECK(out[0].similarity == 1.0);
        CHECK(out.size() <= static_cast<std::size_t>(spec.top_k));
        for (const auto& ka : out) {
            CHECK(ka.similarity > 0.0);
            CHECK(ka.similarity <= 1.0);
            CHECK_FALSE(ka.keyword.empty());
        }
    }
}

TEST_CASE("loading an assignment file attaches rows and tallies rejects") {
    testutil::TempDir tmp;
    std::vector<PaperRecord> corpus(2);
    corpus[0].work_id = "W1";
    corpus[1].work_id = "W2";

    atomic_write_file(tmp / "kw.csv",
                      "work_id,keyword,similarity\n"
                      "W1,hash,0.5\n"
                      "W1,cipher,0.25\n"
                      "W-ghost,phantom,0.4\n"
                      "W2,overflow,1.5\n");
    const AssignmentLoadReport report = load_assignments(tmp / "kw.csv", corpus);
    CHECK(report.rows == 4);
    CHECK(report.attached == 2);
    CHECK(report.unknown_work_id == 1);
    CHECK(report.rejected == 1);
    REQUIRE(corpus[0].keyword_assignments.size() == 2);
    CHECK(corpus[0].keyword_assignments[0].keyword == "hash");
    CHECK(corpus[0].keyword_assignments[0].similarity == 0.5);
    CHECK(corpus[1].keyword_assignments.empty());  // its only row was out of bounds
}

TEST_CASE("malformed assignment rows name their line number") {
    testutil::TempDir tmp;
    std::vector<PaperRecord> corpus(1);
    corpus[0].work_id = "W1";
    atomic_write_file(tmp / "kw.csv",
                      "work_id,keyword,similarity\n"
                      "W1,ok,0.5\n"
                      "W1,too,many,columns\n");
    CHECK_THROWS_WITH_AS(load_assignments(tmp / "kw.csv", corpus), doctest::Contains("line 3"),
                         DataError);
}

TEST_CASE("assignment export and reload is the identity") {
    testutil::TempDir tmp;
    std::mt19937_64 eng(7);
    auto gen = testutil::random_corpus(eng);
    save_assignments(tmp / "kw.csv", gen.corpus);

    auto reloaded = gen.corpus;
    for (auto& rec : reloaded) rec.keyword_assignments.clear();
    const AssignmentLoadReport report = load_assignments(tmp / "kw.csv", reloaded);
    CHECK(report.unknown_work_id == 0);
    CHECK(report.rejected == 0);
    for (std::size_t i = 0; i < gen.corpus.size(); ++i) {
        REQUIRE(reloaded[i].keyword_assignments.size() ==
                gen.corpus[i].keyword_assignments.size());
        for (std::size_t k = 0; k < gen.corpus[i].keyword_assignments.size(); ++k) {
            CHECK(reloaded[i].keyword_assignments[k].keyword ==
                  gen.corpus[i].keyword_assignments[k].keyword);
            CHECK(reloaded[i].keyword_assignments[k].similarity ==
                  doctest::Approx(gen.corpus[i].keyword_assignments[k].similarity)
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("corpus-wide annotation fills every record") {
    std::vector<PaperRecord> corpus;
    corpus.push_back(with_text("aes cipher aes"));
    corpus.push_back(with_text("", ""));
    ExtractorSpec spec;
    annotate_corpus(corpus, spec);
    CHECK_FALSE(corpus[0].keyword_assignments.empty());
    CHECK(corpus[1].keyword_assignments.empty());
}

}  // TEST_SUITE
