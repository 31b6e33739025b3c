#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "techprox/records.hpp"

namespace techprox {

/// Joins the inverted word->positions map back into plain text with single
/// spaces, in ascending position order. Empty map -> empty text.
/// Throws DataError if two words claim the same position (names it) or if a
/// position is negative.
std::string reconstruct_abstract(const std::map<std::string, std::vector<int>>& inverted_index);

struct RefineOptions {
    // A work counts as related to a technology only when its catalog-restricted
    // score is strictly greater than this.
    double relatedness_threshold = 0.0;
};

/// Refines raw works into the analysis corpus:
///   1. drop unparseable publication dates,
///   2. drop months outside the catalog range,
///   3. drop works with no referenced works,
///   4. drop works whose catalog-restricted scores are all at or below the
///      relatedness threshold,
///   5. deduplicate by work_id keeping the most complete record (count of
///      non-empty fields among title/abstract/authors/references/concepts;
///      ties keep the earliest in input order),
///   6. reassign works dated January 1 to month 1 + hash(work_id, seed) mod 12
///      within the same year (corrects the default-date pileup).
/// Every input record is accounted for in the returned CorpusStats.
std::pair<std::vector<PaperRecord>, CorpusStats> refine_corpus(const std::vector<RawWork>& works,
                                                               const TechnologyCatalog& catalog,
                                                               std::uint64_t seed,
                                                               const RefineOptions& opts = {});

/// Partitions a refined corpus by publication month. Pointers index into the
/// caller's vector, which must outlive the buckets.
std::map<MonthKey, std::vector<const PaperRecord*>> month_bucket(
    const std::vector<PaperRecord>& corpus);

// --- JSON (de)serialization -------------------------------------------------
// Raw works use the upstream API's field names so local dumps are
// interchangeable with fetched pages. Paper records use this project's own
// schema.

RawWork raw_work_from_json_line(const std::string& line, long line_number);
std::string raw_work_to_json_line(const RawWork& work);

std::vector<RawWork> load_raw_works_jsonl(const std::filesystem::path& path);
void save_raw_works_jsonl(const std::filesystem::path& path, const std::vector<RawWork>& works);

std::vector<PaperRecord> load_corpus_jsonl(const std::filesystem::path& path);
void save_corpus_jsonl(const std::filesystem::path& path, const std::vector<PaperRecord>& corpus);

std::string corpus_stats_to_json(const CorpusStats& stats);

}  // namespace techprox
