#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "techprox/author_impact.hpp"
#include "techprox/records.hpp"

namespace techprox {

/// The five monthly proximity measures. Numbering matches the reporting
/// convention: 1-2 citations (forward and reverse), 3-4 collaboration
/// (incremental and non-incremental h), 5 shared keywords.
enum class IndexKind {
    CitationFwd = 1,
    CitationRev = 2,
    CollabIncremental = 3,
    CollabNonIncremental = 4,
    KeywordIK = 5,
};

inline constexpr IndexKind kAllIndexKinds[] = {
    IndexKind::CitationFwd, IndexKind::CitationRev, IndexKind::CollabIncremental,
    IndexKind::CollabNonIncremental, IndexKind::KeywordIK};

const char* kind_name(IndexKind kind);        // "citation_fwd", ...
IndexKind kind_from_name(std::string_view s);

struct TechPair {
    std::string t1;
    std::string t2;
};

/// One raw monthly series for a (pair, kind). Dense over the catalog range;
/// nullopt months had no qualifying papers and are interpolated later.
struct IndexSeries {
    TechPair pair;
    IndexKind kind = IndexKind::KeywordIK;
    std::vector<std::optional<double>> values;
};

std::string series_id(const TechPair& pair, IndexKind kind);  // "t1|t2|kind"

/// Work-id resolution over the whole corpus, shared by citation lookups.
class CorpusView {
public:
    explicit CorpusView(const std::vector<PaperRecord>& corpus);
    const PaperRecord* find(const std::string& work_id) const;
    /// References that point outside the corpus, counted once per incidence.
    long unknown_refs() const { return unknown_refs_; }

private:
    std::unordered_map<std::string, const PaperRecord*> by_id_;
    long unknown_refs_ = 0;
};

inline double score_of(const PaperRecord& p, const std::string& tech) {
    auto it = p.tech_scores.find(tech);
    return it == p.tech_scores.end() ? 0.0 : it->second;
}

inline bool related(const PaperRecord& p, const std::string& tech) {
    return score_of(p, tech) > 0.0;
}

/// Shared-keyword proximity for one month's bucket. Sums N*C*A over keywords
/// bridging the pair (N = mean per-side paper count, C = mean similarity,
/// A = mean per-paper attribution). nullopt when the bucket lacks papers on
/// either side; 0.0 when both sides exist but share no keyword.
std::optional<double> keyword_index(const std::vector<const PaperRecord*>& bucket,
                                    const TechPair& pair);

/// Cross-citation proximity: sums (score(p,t1)+score(q,t2))/2 over citation
/// events where p is in the bucket and related to t1 and the cited q is
/// anywhere in the corpus and related to t2. nullopt when the bucket has no
/// paper related to t1.
std::optional<double> citation_index(const CorpusView& view,
                                     const std::vector<const PaperRecord*>& bucket,
                                     const TechPair& pair);

/// Shared-author proximity: sums N*H*A over authors bridging the pair, where
/// H is the author's monthly h from the given table. Absent/zero semantics as
/// for keyword_index.
std::optional<double> collaboration_index(const std::vector<const PaperRecord*>& bucket,
                                          const TechPair& pair, const HIndexTable& h_table,
                                          MonthKey month);

/// All five series for every ordered technology pair over the catalog range.
/// Symmetric kinds are computed once per unordered pair and mirrored;
/// CitationRev(t1,t2) = CitationFwd(t2,t1) by construction. `parallel`
/// selects the OpenMP kernel; both produce identical output.
std::vector<IndexSeries> build_all_series(const std::vector<PaperRecord>& corpus,
                                          const TechnologyCatalog& catalog,
                                          const HIndexTable& h_incremental,
                                          const HIndexTable& h_non_incremental,
                                          bool parallel = true);

void save_series_csv(const std::filesystem::path& path, const std::vector<IndexSeries>& series,
                     const MonthRange& range);
std::vector<IndexSeries> load_series_csv(const std::filesystem::path& path,
                                         const MonthRange& range);

}  // namespace techprox
