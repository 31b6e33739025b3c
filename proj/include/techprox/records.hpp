#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "techprox/month_key.hpp"

namespace techprox {

/// One keyword attached to a paper with its relevance weight in [0,1].
struct KeywordAssignment {
    std::string keyword;
    double similarity = 0.0;

    bool operator==(const KeywordAssignment&) const = default;
};

/// A work as served by OpenAlex (or a JSONL dump in the same schema).
struct RawWork {
    std::string work_id;
    std::optional<std::string> title;
    // keyword -> token positions; OpenAlex serves abstracts inverted.
    std::map<std::string, std::vector<int>> abstract_inverted_index;
    std::string publication_date;  // ISO-8601, may be malformed in the wild
    std::vector<std::string> author_ids;
    std::vector<std::string> author_names;
    std::vector<std::string> referenced_works;
    std::vector<std::pair<std::string, double>> concepts;  // (concept_id, score in [0,1])
};

/// One refined, month-bucketed scholarly record.
struct PaperRecord {
    std::string work_id;
    std::string title;
    std::string abstract_text;
    MonthKey month;
    std::vector<std::string> authors;
    std::vector<std::string> referenced_works;
    std::map<std::string, double> tech_scores;  // technology_id -> score in (0,1]; absent = zero
    std::vector<KeywordAssignment> keyword_assignments;

    bool operator==(const PaperRecord&) const = default;
};

struct Technology {
    std::string id;
    std::string label;
};

struct TechnologyCatalog {
    std::vector<Technology> technologies;
    MonthRange range;  // study window the corpus is restricted to

    bool has(const std::string& id) const {
        for (const auto& t : technologies)
            if (t.id == id) return true;
        return false;
    }
};

/// Accounting of every record through refinement; drops + survivors = input.
struct CorpusStats {
    long input = 0;
    long bad_date = 0;
    long out_of_range = 0;
    long no_refs = 0;
    long no_concepts = 0;
    long dupes_merged = 0;
    long redistributed_from_january = 0;  // survivors whose month was reassigned
    long survivors = 0;

    long total_dropped() const { return bad_date + out_of_range + no_refs + no_concepts + dupes_merged; }
};

}  // namespace techprox
