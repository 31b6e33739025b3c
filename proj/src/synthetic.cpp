#include "techprox/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "techprox/corpus_ingest.hpp"
#include "techprox/util.hpp"

namespace techprox {

namespace {

std::string pad_number(int v, int width) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%0*d", width, v);
    return buf;
}

/// Inverts plain space-separated text into the word->positions map the
/// upstream API uses for abstracts.
std::map<std::string, std::vector<int>> invert_text(const std::string& text) {
    std::map<std::string, std::vector<int>> index;
    int position = 0;
    for (const auto& word : split(text, ' ')) {
        if (word.empty()) continue;
        index[word].push_back(position++);
    }
    return index;
}

std::string month_date(const TechnologyCatalog& catalog, int ordinal) {
    const MonthKey m = catalog.range.at(ordinal);
    // Mid-month day: nothing in the fixture lands on January 1, so the
    // refine stage's date-redistribution rule stays inert here and the
    // planted/control month layout is exact.
    return pad_number(m.year, 4) + "-" + pad_number(m.month, 2) + "-15";
}

}  // namespace

TechnologyCatalog fixture_catalog() {
    TechnologyCatalog catalog;
    catalog.technologies = {{"C100", "Photonic Computing"},
                            {"C200", "Neuromorphic Chips"},
                            {"C300", "Tidal Energy"}};
    catalog.range.start = {2002, 1};
    catalog.range.end = {2016, 12};
    return catalog;
}

std::vector<RawWork> make_fixture_corpus(const FixtureSpec& spec) {
    const TechnologyCatalog catalog = fixture_catalog();
    std::vector<RawWork> works;
    works.reserve(static_cast<std::size_t>(spec.baseline_papers + spec.planted_papers) + 4);

    // --- Baseline: one paper per month, equally related to all three
    // technologies. Every later paper cites the first one, which carries no
    // authors; that keeps both monthly h-index variants at zero for every
    // baseline author, so the collaboration indices of any pair involving
    // C300 stay exactly zero month after month.
    const std::string base_abstract = "cipher cipher cipher lattice lattice protocol mesh kernel";
    for (int i = 0; i < spec.baseline_papers; ++i) {
        RawWork w;
        w.work_id = "W-base-" + pad_number(i, 4);
        w.title = "Baseline survey";
        w.abstract_inverted_index = invert_text(base_abstract);
        w.publication_date = month_date(catalog, i);
        if (i > 0) {
            w.author_ids = {"A-base-" + pad_number(i, 4)};
            w.author_names = {"Baseline Author " + std::to_string(i)};
            w.referenced_works = {"W-base-0000"};
        } else {
            w.referenced_works = {"W-ext-base"};  // unresolvable on purpose
        }
        w.concepts = {{"C100", 0.6}, {"C200", 0.5}, {"C300", 0.4}};
        works.push_back(std::move(w));
    }

    // --- Planted bridge: papers tying C100 to C200 with rising attribution
    // scores, spread over the final third of the range. Authors rotate
    // through a small pool so their h-indices climb; each paper cites all
    // earlier bridge papers plus the final one, so no bridge paper is ever
    // uncited and the non-incremental h spikes stay monotone.
    const std::string bridge_abstract = "bridgecore bridgecore fusionlink fusionlink overlay";
    const int n = spec.planted_papers;
    const std::string capstone = "W-bridge-" + pad_number(n - 1, 2);
    for (int j = 0; j < n; ++j) {
        RawWork w;
        w.work_id = "W-bridge-" + pad_number(j, 2);
        w.title = "Bridge fusion note";
        w.abstract_inverted_index = invert_text(bridge_abstract);
        const int offset =
            n > 1 ? static_cast<int>(std::lround(static_cast<double>(j) * spec.planted_span /
                                                 (n - 1)))
                  : 0;
        w.publication_date = month_date(catalog, spec.planted_start_month + offset);
        const int a1 = j % 5, a2 = (j + 2) % 5;
        w.author_ids = {"A-bridge-" + std::to_string(a1), "A-bridge-" + std::to_string(a2)};
        w.author_names = {"Bridge Author " + std::to_string(a1),
                          "Bridge Author " + std::to_string(a2)};
        if (j == 0) w.referenced_works.push_back("W-ext-bridge");
        for (int i = 0; i < j; ++i) w.referenced_works.push_back("W-bridge-" + pad_number(i, 2));
        if (j < n - 1) w.referenced_works.push_back(capstone);
        w.concepts = {{"C100", 0.5 + 0.02 * j}, {"C200", 0.4 + 0.02 * j}};
        works.push_back(std::move(w));
    }

    // --- Malformed tail: one record per refinement drop rule.
    {
        RawWork w;  // unparseable date
        w.work_id = "W-junk-baddate";
        w.title = "Malformed date record";
        w.abstract_inverted_index = invert_text("mesh kernel");
        w.publication_date = "not-a-date";
        w.author_ids = {"A-junk-1"};
        w.author_names = {"Junk Author 1"};
        w.referenced_works = {"W-base-0000"};
        w.concepts = {{"C100", 0.5}};
        works.push_back(std::move(w));
    }
    {
        RawWork w;  // no referenced works
        w.work_id = "W-junk-norefs";
        w.title = "Reference-free record";
        w.abstract_inverted_index = invert_text("protocol mesh");
        w.publication_date = "2005-06-15";
        w.author_ids = {"A-junk-2"};
        w.author_names = {"Junk Author 2"};
        w.concepts = {{"C100", 0.5}};
        works.push_back(std::move(w));
    }
    {
        RawWork w;  // only an unknown concept -> no catalog relation
        w.work_id = "W-junk-noconcepts";
        w.title = "Off-catalog record";
        w.abstract_inverted_index = invert_text("lattice protocol");
        w.publication_date = "2005-06-15";
        w.author_ids = {"A-junk-3"};
        w.author_names = {"Junk Author 3"};
        w.referenced_works = {"W-base-0000"};
        w.concepts = {{"C900", 0.9}};
        works.push_back(std::move(w));
    }
    {
        RawWork w;  // duplicate of a baseline id, but far less complete
        w.work_id = "W-base-0010";
        w.publication_date = "2002-11-15";
        w.referenced_works = {"W-base-0000"};
        w.concepts = {{"C100", 0.3}};
        works.push_back(std::move(w));
    }

    return works;
}

std::vector<std::vector<double>> make_external_corpus(std::uint64_t seed, int n_series,
                                                      int length) {
    std::mt19937_64 eng(fnv1a64_mix("external", seed));
    std::vector<std::vector<double>> corpus;
    corpus.reserve(static_cast<std::size_t>(n_series));
    for (int i = 0; i < n_series; ++i) {
        std::vector<double> v(static_cast<std::size_t>(length));
        const int family = i % 3;
        const double scale = 0.5 + rng::unit(eng);
        if (family == 0) {  // noisy ramp
            const double slope = 0.002 + 0.01 * rng::unit(eng);
            for (int t = 0; t < length; ++t)
                v[static_cast<std::size_t>(t)] =
                    scale * 0.2 + slope * t + 0.02 * rng::unit(eng);
        } else if (family == 1) {  // seasonal wave
            const int periods[] = {6, 12, 24};
            const int period = periods[rng::pick_index(eng, 3)];
            const double phase = 6.283185307179586 * rng::unit(eng);
            for (int t = 0; t < length; ++t)
                v[static_cast<std::size_t>(t)] =
                    scale * (1.0 + 0.5 * std::sin(6.283185307179586 * t / period + phase));
        } else {  // logistic plateau
            const double midpoint = length * (0.3 + 0.4 * rng::unit(eng));
            const double rate = 0.05 + 0.1 * rng::unit(eng);
            for (int t = 0; t < length; ++t)
                v[static_cast<std::size_t>(t)] = scale / (1.0 + std::exp(-rate * (t - midpoint)));
        }
        for (double& x : v)
            if (x < 0) x = 0;
        corpus.push_back(std::move(v));
    }
    return corpus;
}

void write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec) {
    std::filesystem::create_directories(dir);
    save_raw_works_jsonl(dir / "raw_works.jsonl", make_fixture_corpus(spec));

    const auto external = make_external_corpus(spec.seed, 60, fixture_catalog().range.length());
    std::string csv;
    for (std::size_t i = 0; i < external.size(); ++i) {
        csv += "ext-" + std::to_string(i);
        for (double v : external[i]) csv += "," + fmt_double(v);
        csv += "\n";
    }
    atomic_write_file(dir / "external_corpus.csv", csv);

    const std::string config =
        "# Planted-convergence fixture: C100/C200 converge from month 120 of 180;\n"
        "# C300 is the unrelated control. Runs fully offline from raw_works.jsonl.\n"
        "[paths]\n"
        "output_dir = out\n"
        "cache_dir = cache\n"
        "raw_dump = raw_works.jsonl\n"
        "external_corpus = external_corpus.csv\n"
        "\n"
        "[catalog]\n"
        "technology = C100 Photonic Computing\n"
        "technology = C200 Neuromorphic Chips\n"
        "technology = C300 Tidal Energy\n"
        "\n"
        "[range]\n"
        "start = 2002-01\n"
        "end = 2016-12\n"
        "\n"
        "[refine]\n"
        "relatedness_threshold = 0\n"
        "\n"
        "[annotate]\n"
        "top_k = 5\n"
        "\n"
        "[process]\n"
        "alpha = 0.1\n"
        "flat_mean_threshold = 0.02\n"
        "exclusion_rate_threshold = 0.5\n"
        "\n"
        "[cluster]\n"
        "k = 5\n"
        "algorithm = kshape\n"
        "max_iters = 100\n"
        "\n"
        "[forecast]\n"
        "horizons = 3,6,12\n"
        "lag_window = 12\n"
        "n_sections = 5\n"
        "seasonal_k = 12\n"
        "alpha = 0.1\n"
        "tree_depth_grid = 3\n"
        "n_trees = 30\n"
        "learning_rate = 0.1\n"
        "\n"
        "[seeds]\n"
        "refine = 101\n"
        "cluster = 202\n"
        "forecast = 303\n";
    atomic_write_file(dir / "config.ini", config);
}

}  // namespace techprox
