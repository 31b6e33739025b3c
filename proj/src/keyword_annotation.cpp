#include "techprox/keyword_annotation.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include "techprox/util.hpp"

namespace techprox {

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words = {
        "a",     "an",    "and",   "are",   "as",    "at",    "be",    "but",  "by",    "for",
        "from",  "has",   "have",  "in",    "into",  "is",    "it",    "its",  "of",    "on",
        "or",    "that",  "the",   "their", "there", "these", "this",  "to",   "was",   "we",
        "were",  "which", "with",  "also",  "can",   "our",   "such",  "than", "then",  "they",
        "been",  "being", "both",  "each",  "how",   "more",  "most",  "not",  "other", "over",
        "some",  "under", "using", "used",  "use",   "based", "paper", "study"};
    return words;
}

namespace {

std::vector<std::string> tokenize(const std::string& text, const std::set<std::string>& stop) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        char lower = static_cast<char>(std::tolower(c));
        if ((lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9')) {
            current += lower;
        } else if (!current.empty()) {
            if (!stop.count(current)) tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty() && !stop.count(current)) tokens.push_back(current);
    return tokens;
}

int term_token_count(const std::string& term) {
    return 1 + static_cast<int>(std::count(term.begin(), term.end(), ' '));
}

}  // namespace

std::vector<KeywordAssignment> annotate_fallback(const PaperRecord& record,
                                                 const ExtractorSpec& spec) {
    if (spec.top_k < 1) throw ConfigError("top_k must be >= 1");
    const std::set<std::string>& stop =
        spec.stopwords.empty() ? default_stopwords() : spec.stopwords;
    std::vector<std::string> tokens = tokenize(record.title + " " + record.abstract_text, stop);
    if (tokens.empty()) return {};

    std::map<std::string, int> tf;
    for (const auto& t : tokens) ++tf[t];
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) ++tf[tokens[i] + " " + tokens[i + 1]];

    std::vector<std::pair<std::string, int>> ranked(tf.begin(), tf.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        int ta = term_token_count(a.first), tb = term_token_count(b.first);
        if (ta != tb) return ta < tb;
        return a.first < b.first;
    });

    const double top_tf = static_cast<double>(ranked.front().second);
    std::vector<KeywordAssignment> out;
    for (const auto& [term, count] : ranked) {
        if (static_cast<int>(out.size()) >= spec.top_k) break;
        out.push_back({term, static_cast<double>(count) / top_tf});
    }
    return out;
}

void annotate_corpus(std::vector<PaperRecord>& corpus, const ExtractorSpec& spec) {
    for (auto& rec : corpus) rec.keyword_assignments = annotate_fallback(rec, spec);
}

AssignmentLoadReport load_assignments(const std::filesystem::path& path,
                                      std::vector<PaperRecord>& corpus) {
    std::unordered_map<std::string, PaperRecord*> by_id;
    for (auto& rec : corpus) {
        rec.keyword_assignments.clear();
        by_id.emplace(rec.work_id, &rec);
    }
    AssignmentLoadReport report;
    std::istringstream in(read_file(path));
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_number == 1 && line == "work_id,keyword,similarity") continue;
        std::vector<std::string> cols = split(line, ',');
        if (cols.size() != 3)
            throw DataError("assignments line " + std::to_string(line_number) +
                            ": expected 3 columns, got " + std::to_string(cols.size()));
        ++report.rows;
        double similarity = parse_double(cols[2], "assignment similarity");
        if (similarity < 0.0 || similarity > 1.0) {
            ++report.rejected;
            continue;
        }
        auto it = by_id.find(cols[0]);
        if (it == by_id.end()) {
            ++report.unknown_work_id;
            continue;
        }
        it->second->keyword_assignments.push_back({normalize_whitespace(to_lower(cols[1])),
                                                   similarity});
        ++report.attached;
    }
    return report;
}

void save_assignments(const std::filesystem::path& path, const std::vector<PaperRecord>& corpus) {
    std::string out = "work_id,keyword,similarity\n";
    for (const auto& rec : corpus)
        for (const auto& k : rec.keyword_assignments)
            out += rec.work_id + "," + k.keyword + "," + fmt_double(k.similarity) + "\n";
    atomic_write_file(path, out);
}

}  // namespace techprox
