#pragma once

// Shared test utilities: a scratch-directory guard, a seeded random-corpus
// generator, and partition-agreement scoring. Framework-free so both the
// unit binary and the acceptance binary can include it.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "techprox/records.hpp"
#include "techprox/util.hpp"

namespace testutil {

/// mkdtemp-backed scratch directory, removed on scope exit.
class TempDir {
public:
    TempDir() {
        std::string templ =
            (std::filesystem::temp_directory_path() / "techprox-test-XXXXXX").string();
        std::vector<char> buf(templ.begin(), templ.end());
        buf.push_back('\0');
        if (::mkdtemp(buf.data()) == nullptr)
            throw std::runtime_error("mkdtemp failed for " + templ);
        path_ = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::size_t pick(std::mt19937_64& eng, std::size_t n) {
    return techprox::rng::pick_index(eng, n);
}

struct GeneratedCorpus {
    techprox::TechnologyCatalog catalog;
    std::vector<techprox::PaperRecord> corpus;
};

/// Small random corpus over a 6-month window: 2..max_techs technologies,
/// 1..max_papers papers with seeded authors, keywords, strictly positive
/// attribution scores, within-corpus references, and the occasional
/// dangling reference.
inline GeneratedCorpus random_corpus(std::mt19937_64& eng, int max_papers = 20,
                                     int max_techs = 4) {
    using namespace techprox;
    GeneratedCorpus g;
    const int n_techs =
        2 + (max_techs > 2 ? static_cast<int>(pick(eng, static_cast<std::size_t>(max_techs - 1)))
                           : 0);
    for (int t = 0; t < n_techs; ++t)
        g.catalog.technologies.push_back(
            {"T" + std::to_string(t + 1), "Tech " + std::to_string(t + 1)});
    g.catalog.range = MonthRange{{2020, 1}, {2020, 6}};

    const int n_papers = 1 + static_cast<int>(pick(eng, static_cast<std::size_t>(max_papers)));
    for (int i = 0; i < n_papers; ++i) {
        PaperRecord p;
        p.work_id = "W" + std::to_string(i);
        p.title = "paper " + std::to_string(i);
        p.month = g.catalog.range.at(static_cast<int>(pick(eng, 6)));
        for (int a = 0; a < 6; ++a)
            if (rng::unit(eng) < 0.35) p.authors.push_back("a" + std::to_string(a));
        for (int t = 0; t < n_techs; ++t)
            if (rng::unit(eng) < 0.55)
                p.tech_scores["T" + std::to_string(t + 1)] =
                    static_cast<double>(1 + pick(eng, 100)) / 100.0;
        for (int k = 0; k < 8; ++k)
            if (rng::unit(eng) < 0.3)
                p.keyword_assignments.push_back(
                    {"kw" + std::to_string(k), static_cast<double>(1 + pick(eng, 10)) / 10.0});
        for (int j = 0; j < i; ++j)
            if (rng::unit(eng) < 0.25) p.referenced_works.push_back("W" + std::to_string(j));
        if (rng::unit(eng) < 0.2) p.referenced_works.push_back("X-unknown");
        g.corpus.push_back(std::move(p));
    }
    return g;
}

/// Adjusted Rand index between two labelings of the same points: 1 for
/// identical partitions, around 0 for independent ones.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::runtime_error("ARI needs two equal-length non-empty labelings");
    const auto comb2 = [](double n) { return n * (n - 1.0) / 2.0; };
    std::map<std::pair<int, int>, long> cells;
    std::map<int, long> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++cells[{a[i], b[i]}];
        ++rows[a[i]];
        ++cols[b[i]];
    }
    double sum_cells = 0, sum_rows = 0, sum_cols = 0;
    for (const auto& [key, n] : cells) sum_cells += comb2(static_cast<double>(n));
    for (const auto& [key, n] : rows) sum_rows += comb2(static_cast<double>(n));
    for (const auto& [key, n] : cols) sum_cols += comb2(static_cast<double>(n));
    const double total = comb2(static_cast<double>(a.size()));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = (sum_rows + sum_cols) / 2.0;
    if (max_index == expected) return 1.0;  // both partitions trivial
    return (sum_cells - expected) / (max_index - expected);
}

/// Relative comparison with an absolute floor of 1, for values near zero.
inline bool close(double x, double y, double rel = 1e-12) {
    return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)});
}

inline bool close_opt(const std::optional<double>& x, const std::optional<double>& y,
                      double rel = 1e-12) {
    if (x.has_value() != y.has_value()) return false;
    return !x || close(*x, *y, rel);
}

}  // namespace testutil
