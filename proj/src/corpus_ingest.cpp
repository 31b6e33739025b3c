#include "techprox/corpus_ingest.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "techprox/util.hpp"

namespace techprox {

using nlohmann::json;

std::string reconstruct_abstract(const std::map<std::string, std::vector<int>>& inverted_index) {
    std::vector<std::pair<int, const std::string*>> slots;
    for (const auto& [word, positions] : inverted_index) {
        for (int pos : positions) {
            if (pos < 0) throw DataError("abstract index: negative position " + std::to_string(pos));
            slots.emplace_back(pos, &word);
        }
    }
    std::sort(slots.begin(), slots.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i > 0 && slots[i].first == slots[i - 1].first)
            throw DataError("abstract index: position " + std::to_string(slots[i].first) +
                            " claimed by two words");
        if (i > 0) out += ' ';
        out += *slots[i].second;
    }
    return out;
}

namespace {

int completeness(const RawWork& w) {
    int score = 0;
    if (w.title && !w.title->empty()) ++score;
    if (!w.abstract_inverted_index.empty()) ++score;
    if (!w.author_ids.empty()) ++score;
    if (!w.referenced_works.empty()) ++score;
    if (!w.concepts.empty()) ++score;
    return score;
}

}  // namespace

std::pair<std::vector<PaperRecord>, CorpusStats> refine_corpus(const std::vector<RawWork>& works,
                                                               const TechnologyCatalog& catalog,
                                                               std::uint64_t seed,
                                                               const RefineOptions& opts) {
    CorpusStats stats;
    stats.input = static_cast<long>(works.size());

    struct Candidate {
        const RawWork* work;
        std::size_t input_order;
        IsoDate date;
        std::map<std::string, double> tech_scores;
    };
    std::vector<Candidate> kept;
    kept.reserve(works.size());

    for (std::size_t i = 0; i < works.size(); ++i) {
        const RawWork& w = works[i];
        IsoDate date;
        if (!try_parse_iso_date(w.publication_date, date)) {
            ++stats.bad_date;
            continue;
        }
        if (!catalog.range.contains(MonthKey{date.year, date.month})) {
            ++stats.out_of_range;
            continue;
        }
        if (w.referenced_works.empty()) {
            ++stats.no_refs;
            continue;
        }
        std::map<std::string, double> scores;
        for (const auto& [concept_id, score] : w.concepts) {
            if (!catalog.has(concept_id)) continue;
            if (score <= opts.relatedness_threshold) continue;
            auto [it, inserted] = scores.emplace(concept_id, score);
            if (!inserted && score > it->second) it->second = score;
        }
        if (scores.empty()) {
            ++stats.no_concepts;
            continue;
        }
        kept.push_back({&w, i, date, std::move(scores)});
    }

    // Dedup by work_id: keep the most complete record, earliest on ties.
    std::map<std::string, std::size_t> best;  // work_id -> index into kept
    std::vector<bool> alive(kept.size(), false);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        auto [it, inserted] = best.emplace(kept[i].work->work_id, i);
        if (inserted) {
            alive[i] = true;
            continue;
        }
        ++stats.dupes_merged;
        if (completeness(*kept[i].work) > completeness(*kept[it->second].work)) {
            alive[it->second] = false;
            alive[i] = true;
            it->second = i;
        }
    }

    std::vector<PaperRecord> corpus;
    corpus.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (!alive[i]) continue;
        const Candidate& c = kept[i];
        PaperRecord rec;
        rec.work_id = c.work->work_id;
        rec.title = c.work->title.value_or("");
        rec.abstract_text = reconstruct_abstract(c.work->abstract_inverted_index);
        rec.month = MonthKey{c.date.year, c.date.month};
        if (c.date.month == 1 && c.date.day == 1) {
            rec.month.month = 1 + static_cast<int>(fnv1a64_mix(rec.work_id, seed) % 12);
            ++stats.redistributed_from_january;
        }
        if (!catalog.range.contains(rec.month)) {
            // Only reachable when the range does not span whole years.
            ++stats.out_of_range;
            --stats.redistributed_from_january;
            continue;
        }
        rec.authors = c.work->author_ids;
        rec.referenced_works = c.work->referenced_works;
        // Drop duplicate author/reference entries so each event counts once.
        std::sort(rec.authors.begin(), rec.authors.end());
        rec.authors.erase(std::unique(rec.authors.begin(), rec.authors.end()), rec.authors.end());
        std::sort(rec.referenced_works.begin(), rec.referenced_works.end());
        rec.referenced_works.erase(
            std::unique(rec.referenced_works.begin(), rec.referenced_works.end()),
            rec.referenced_works.end());
        rec.tech_scores = c.tech_scores;
        corpus.push_back(std::move(rec));
    }
    stats.survivors = static_cast<long>(corpus.size());
    return {std::move(corpus), stats};
}

std::map<MonthKey, std::vector<const PaperRecord*>> month_bucket(
    const std::vector<PaperRecord>& corpus) {
    std::map<MonthKey, std::vector<const PaperRecord*>> buckets;
    for (const auto& rec : corpus) buckets[rec.month].push_back(&rec);
    return buckets;
}

RawWork raw_work_from_json_line(const std::string& line, long line_number) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError("works line " + std::to_string(line_number) + ": " + e.what());
    }
    RawWork w;
    w.work_id = j.value("id", "");
    if (j.contains("title") && j["title"].is_string())
        w.title = j["title"].get<std::string>();
    else if (j.contains("display_name") && j["display_name"].is_string())
        w.title = j["display_name"].get<std::string>();
    if (j.contains("abstract_inverted_index") && j["abstract_inverted_index"].is_object()) {
        for (const auto& [word, positions] : j["abstract_inverted_index"].items()) {
            std::vector<int>& slot = w.abstract_inverted_index[word];
            for (const auto& p : positions) slot.push_back(p.get<int>());
        }
    }
    w.publication_date = j.value("publication_date", "");
    if (j.contains("authorships") && j["authorships"].is_array()) {
        for (const auto& a : j["authorships"]) {
            if (!a.contains("author")) continue;
            w.author_ids.push_back(a["author"].value("id", ""));
            w.author_names.push_back(a["author"].value("display_name", ""));
        }
    }
    if (j.contains("referenced_works") && j["referenced_works"].is_array())
        for (const auto& r : j["referenced_works"]) w.referenced_works.push_back(r.get<std::string>());
    if (j.contains("concepts") && j["concepts"].is_array()) {
        for (const auto& c : j["concepts"]) {
            double score = c.value("score", 0.0);
            if (score < 0.0 || score > 1.0)
                throw DataError("works line " + std::to_string(line_number) +
                                ": concept score out of [0,1]: " + fmt_double(score));
            w.concepts.emplace_back(c.value("id", ""), score);
        }
    }
    if (w.work_id.empty())
        throw DataError("works line " + std::to_string(line_number) + ": empty work id");
    return w;
}

std::string raw_work_to_json_line(const RawWork& work) {
    json j;
    j["id"] = work.work_id;
    if (work.title) j["title"] = *work.title;
    json inv = json::object();
    for (const auto& [word, positions] : work.abstract_inverted_index) inv[word] = positions;
    j["abstract_inverted_index"] = inv;
    j["publication_date"] = work.publication_date;
    json authorships = json::array();
    for (std::size_t i = 0; i < work.author_ids.size(); ++i) {
        json a;
        a["author"]["id"] = work.author_ids[i];
        a["author"]["display_name"] = i < work.author_names.size() ? work.author_names[i] : "";
        authorships.push_back(a);
    }
    j["authorships"] = authorships;
    j["referenced_works"] = work.referenced_works;
    json concepts = json::array();
    for (const auto& [id, score] : work.concepts) {
        json c;
        c["id"] = id;
        c["score"] = score;
        concepts.push_back(c);
    }
    j["concepts"] = concepts;
    return j.dump();
}

std::vector<RawWork> load_raw_works_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<RawWork> works;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        works.push_back(raw_work_from_json_line(line, line_number));
    }
    return works;
}

void save_raw_works_jsonl(const std::filesystem::path& path, const std::vector<RawWork>& works) {
    std::string out;
    for (const auto& w : works) {
        out += raw_work_to_json_line(w);
        out += '\n';
    }
    atomic_write_file(path, out);
}

std::vector<PaperRecord> load_corpus_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<PaperRecord> corpus;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("corpus line " + std::to_string(line_number) + ": " + e.what());
        }
        PaperRecord rec;
        rec.work_id = j.at("work_id").get<std::string>();
        rec.title = j.value("title", "");
        rec.abstract_text = j.value("abstract", "");
        rec.month = parse_month(j.at("month").get<std::string>());
        for (const auto& a : j.at("authors")) rec.authors.push_back(a.get<std::string>());
        for (const auto& r : j.at("referenced_works"))
            rec.referenced_works.push_back(r.get<std::string>());
        for (const auto& [tech, score] : j.at("tech_scores").items())
            rec.tech_scores[tech] = score.get<double>();
        if (j.contains("keywords"))
            for (const auto& k : j["keywords"])
                rec.keyword_assignments.push_back(
                    {k.at("keyword").get<std::string>(), k.at("similarity").get<double>()});
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

void save_corpus_jsonl(const std::filesystem::path& path, const std::vector<PaperRecord>& corpus) {
    std::string out;
    for (const auto& rec : corpus) {
        json j;
        j["work_id"] = rec.work_id;
        j["title"] = rec.title;
        j["abstract"] = rec.abstract_text;
        j["month"] = format_month(rec.month);
        j["authors"] = rec.authors;
        j["referenced_works"] = rec.referenced_works;
        j["tech_scores"] = rec.tech_scores;
        json kws = json::array();
        for (const auto& k : rec.keyword_assignments) {
            json kj;
            kj["keyword"] = k.keyword;
            kj["similarity"] = k.similarity;
            kws.push_back(kj);
        }
        j["keywords"] = kws;
        out += j.dump();
        out += '\n';
    }
    atomic_write_file(path, out);
}

std::string corpus_stats_to_json(const CorpusStats& stats) {
    json j;
    j["input"] = stats.input;
    j["bad_date"] = stats.bad_date;
    j["out_of_range"] = stats.out_of_range;
    j["no_refs"] = stats.no_refs;
    j["no_concepts"] = stats.no_concepts;
    j["dupes_merged"] = stats.dupes_merged;
    j["redistributed_from_january"] = stats.redistributed_from_january;
    j["survivors"] = stats.survivors;
    return j.dump(2) + "\n";
}

}  // namespace techprox
