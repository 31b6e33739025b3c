#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "techprox/records.hpp"

namespace techprox {

struct ExtractorSpec {
    enum class Mode { LoadFile, FrequencyFallback };
    Mode mode = Mode::FrequencyFallback;
    int top_k = 5;
    // Empty set means "use the built-in English stopword list".
    std::set<std::string> stopwords;
};

const std::set<std::string>& default_stopwords();

/// Frequency-based keyword extraction over title + abstract: lowercase
/// [a-z0-9]+ tokens, stopwords removed, unigrams and bigrams (over consecutive
/// surviving tokens) ranked by (term frequency desc, token count asc,
/// lexicographic asc). Returns at most top_k terms with
/// similarity = tf(term)/tf(top term), so the top term scores exactly 1.0.
/// Empty text -> empty list.
std::vector<KeywordAssignment> annotate_fallback(const PaperRecord& record,
                                                 const ExtractorSpec& spec);

/// Runs the fallback extractor over the whole corpus in place.
void annotate_corpus(std::vector<PaperRecord>& corpus, const ExtractorSpec& spec);

struct AssignmentLoadReport {
    long rows = 0;
    long attached = 0;
    long unknown_work_id = 0;  // rows naming no corpus record, skipped
    long rejected = 0;         // similarity outside [0,1], skipped
};

/// Loads `work_id,keyword,similarity` CSV rows onto the corpus. Records
/// absent from the file keep empty assignment lists. Malformed rows raise
/// DataError with the line number.
AssignmentLoadReport load_assignments(const std::filesystem::path& path,
                                      std::vector<PaperRecord>& corpus);

void save_assignments(const std::filesystem::path& path, const std::vector<PaperRecord>& corpus);

}  // namespace techprox
