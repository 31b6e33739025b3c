#include "techprox/proximity_indices.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "techprox/corpus_ingest.hpp"
#include "techprox/util.hpp"

namespace techprox {

const char* kind_name(IndexKind kind) {
    switch (kind) {
        case IndexKind::CitationFwd: return "citation_fwd";
        case IndexKind::CitationRev: return "citation_rev";
        case IndexKind::CollabIncremental: return "collab_incremental";
        case IndexKind::CollabNonIncremental: return "collab_non_incremental";
        case IndexKind::KeywordIK: return "keyword";
    }
    return "unknown";
}

IndexKind kind_from_name(std::string_view s) {
    for (IndexKind k : kAllIndexKinds)
        if (s == kind_name(k)) return k;
    throw DataError("unknown index kind: " + std::string(s));
}

std::string series_id(const TechPair& pair, IndexKind kind) {
    return pair.t1 + "|" + pair.t2 + "|" + kind_name(kind);
}

CorpusView::CorpusView(const std::vector<PaperRecord>& corpus) {
    by_id_.reserve(corpus.size());
    for (const auto& rec : corpus) by_id_.emplace(rec.work_id, &rec);
    for (const auto& rec : corpus)
        for (const auto& ref : rec.referenced_works)
            if (!by_id_.count(ref)) ++unknown_refs_;
}

const PaperRecord* CorpusView::find(const std::string& work_id) const {
    auto it = by_id_.find(work_id);
    return it == by_id_.end() ? nullptr : it->second;
}

namespace {

double pair_attribution(const PaperRecord& p, const TechPair& pair) {
    return (score_of(p, pair.t1) + score_of(p, pair.t2)) / 2.0;
}

bool sides_populated(const std::vector<const PaperRecord*>& bucket, const TechPair& pair) {
    bool has1 = false, has2 = false;
    for (const auto* p : bucket) {
        has1 = has1 || related(*p, pair.t1);
        has2 = has2 || related(*p, pair.t2);
        if (has1 && has2) return true;
    }
    return false;
}

}  // namespace

std::optional<double> keyword_index(const std::vector<const PaperRecord*>& bucket,
                                    const TechPair& pair) {
    if (!sides_populated(bucket, pair)) return std::nullopt;

    // keyword -> assignment incidences among papers related to either side.
    struct Incidence {
        const PaperRecord* paper;
        double similarity;
    };
    std::map<std::string, std::vector<Incidence>> by_keyword;
    for (const auto* p : bucket) {
        if (!related(*p, pair.t1) && !related(*p, pair.t2)) continue;
        for (const auto& a : p->keyword_assignments)
            by_keyword[a.keyword].push_back({p, a.similarity});
    }

    double total = 0.0;
    for (const auto& [keyword, incidences] : by_keyword) {
        // Distinct papers carrying this keyword, in first-seen order.
        std::vector<const PaperRecord*> papers;
        for (const auto& inc : incidences)
            if (std::find(papers.begin(), papers.end(), inc.paper) == papers.end())
                papers.push_back(inc.paper);
        int n1 = 0, n2 = 0;
        for (const auto* p : papers) {
            if (related(*p, pair.t1)) ++n1;
            if (related(*p, pair.t2)) ++n2;
        }
        if (n1 == 0 || n2 == 0) continue;  // keyword does not bridge the pair
        const double n = (n1 + n2) / 2.0;
        double c = 0.0;
        for (const auto& inc : incidences) c += inc.similarity;
        c /= static_cast<double>(incidences.size());
        double a = 0.0;
        for (const auto* p : papers) a += pair_attribution(*p, pair);
        a /= static_cast<double>(papers.size());
        total += n * c * a;
    }
    return total;
}

std::optional<double> citation_index(const CorpusView& view,
                                     const std::vector<const PaperRecord*>& bucket,
                                     const TechPair& pair) {
    bool any_t1 = false;
    for (const auto* p : bucket) any_t1 = any_t1 || related(*p, pair.t1);
    if (!any_t1) return std::nullopt;

    double total = 0.0;
    for (const auto* p : bucket) {
        if (!related(*p, pair.t1)) continue;
        // Each distinct cited work contributes once per citing paper.
        std::set<std::string> seen;
        for (const auto& ref : p->referenced_works) {
            if (!seen.insert(ref).second) continue;
            const PaperRecord* q = view.find(ref);
            if (q == nullptr || !related(*q, pair.t2)) continue;
            total += (score_of(*p, pair.t1) + score_of(*q, pair.t2)) / 2.0;
        }
    }
    return total;
}

std::optional<double> collaboration_index(const std::vector<const PaperRecord*>& bucket,
                                          const TechPair& pair, const HIndexTable& h_table,
                                          MonthKey month) {
    if (!sides_populated(bucket, pair)) return std::nullopt;

    std::map<std::string, std::vector<const PaperRecord*>> papers_of;
    for (const auto* p : bucket) {
        if (!related(*p, pair.t1) && !related(*p, pair.t2)) continue;
        std::vector<std::string> authors = p->authors;
        std::sort(authors.begin(), authors.end());
        authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
        for (const auto& author : authors) papers_of[author].push_back(p);
    }

    const int period = h_table.variant.granularity == Granularity::Monthly
                           ? monthly_period(month)
                           : yearly_period(month);
    double total = 0.0;
    for (const auto& [author, papers] : papers_of) {
        int n1 = 0, n2 = 0;
        for (const auto* p : papers) {
            if (related(*p, pair.t1)) ++n1;
            if (related(*p, pair.t2)) ++n2;
        }
        if (n1 == 0 || n2 == 0) continue;  // author does not bridge the pair
        const double n = (n1 + n2) / 2.0;
        const double h = static_cast<double>(h_table.h_for(author, period));
        double a = 0.0;
        for (const auto* p : papers) a += pair_attribution(*p, pair);
        a /= static_cast<double>(papers.size());
        total += n * h * a;
    }
    return total;
}

std::vector<IndexSeries> build_all_series(const std::vector<PaperRecord>& corpus,
                                          const TechnologyCatalog& catalog,
                                          const HIndexTable& h_incremental,
                                          const HIndexTable& h_non_incremental, bool parallel) {
    const auto& techs = catalog.technologies;
    const int n_tech = static_cast<int>(techs.size());
    const int n_months = catalog.range.length();

    CorpusView view(corpus);
    auto buckets = month_bucket(corpus);
    static const std::vector<const PaperRecord*> empty_bucket;
    std::vector<const std::vector<const PaperRecord*>*> bucket_at(n_months, &empty_bucket);
    for (int m = 0; m < n_months; ++m) {
        auto it = buckets.find(catalog.range.at(m));
        if (it != buckets.end()) bucket_at[m] = &it->second;
    }

    // Ordered pairs in catalog order; pair_pos[(i,j)] -> series block start.
    std::vector<std::pair<int, int>> ordered_pairs;
    std::vector<int> pair_pos(static_cast<std::size_t>(n_tech) * n_tech, -1);
    for (int i = 0; i < n_tech; ++i)
        for (int j = 0; j < n_tech; ++j) {
            if (i == j) continue;
            pair_pos[static_cast<std::size_t>(i) * n_tech + j] =
                static_cast<int>(ordered_pairs.size());
            ordered_pairs.emplace_back(i, j);
        }

    std::vector<IndexSeries> series(ordered_pairs.size() * 5);
    for (std::size_t p = 0; p < ordered_pairs.size(); ++p) {
        TechPair pair{techs[ordered_pairs[p].first].id, techs[ordered_pairs[p].second].id};
        for (int k = 0; k < 5; ++k) {
            IndexSeries& s = series[p * 5 + k];
            s.pair = pair;
            s.kind = kAllIndexKinds[k];
            s.values.assign(n_months, std::nullopt);
        }
    }
    auto slot = [&](int i, int j, IndexKind kind) -> IndexSeries& {
        const int pos = pair_pos[static_cast<std::size_t>(i) * n_tech + j];
        return series[static_cast<std::size_t>(pos) * 5 + (static_cast<int>(kind) - 1)];
    };

    // Unordered pairs x months; every slot is written exactly once, so the
    // parallel and serial kernels are byte-identical.
    std::vector<std::pair<int, int>> unordered_pairs;
    for (int i = 0; i < n_tech; ++i)
        for (int j = i + 1; j < n_tech; ++j) unordered_pairs.emplace_back(i, j);
    const long n_tasks = static_cast<long>(unordered_pairs.size()) * n_months;

#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (long task = 0; task < n_tasks; ++task) {
        const auto [i, j] = unordered_pairs[task / n_months];
        const int m = static_cast<int>(task % n_months);
        const MonthKey month = catalog.range.at(m);
        const auto& bucket = *bucket_at[m];
        const TechPair fwd{techs[i].id, techs[j].id};
        const TechPair rev{techs[j].id, techs[i].id};

        const auto kw = keyword_index(bucket, fwd);
        const auto collab_inc = collaboration_index(bucket, fwd, h_incremental, month);
        const auto collab_non = collaboration_index(bucket, fwd, h_non_incremental, month);
        const auto cit_ij = citation_index(view, bucket, fwd);
        const auto cit_ji = citation_index(view, bucket, rev);

        slot(i, j, IndexKind::KeywordIK).values[m] = kw;
        slot(j, i, IndexKind::KeywordIK).values[m] = kw;
        slot(i, j, IndexKind::CollabIncremental).values[m] = collab_inc;
        slot(j, i, IndexKind::CollabIncremental).values[m] = collab_inc;
        slot(i, j, IndexKind::CollabNonIncremental).values[m] = collab_non;
        slot(j, i, IndexKind::CollabNonIncremental).values[m] = collab_non;
        slot(i, j, IndexKind::CitationFwd).values[m] = cit_ij;
        slot(j, i, IndexKind::CitationFwd).values[m] = cit_ji;
        slot(i, j, IndexKind::CitationRev).values[m] = cit_ji;
        slot(j, i, IndexKind::CitationRev).values[m] = cit_ij;
    }
    return series;
}

void save_series_csv(const std::filesystem::path& path, const std::vector<IndexSeries>& series,
                     const MonthRange& range) {
    std::string out = "t1,t2,kind,year,month,value,is_missing\n";
    for (const auto& s : series) {
        for (int m = 0; m < static_cast<int>(s.values.size()); ++m) {
            const MonthKey key = range.at(m);
            out += s.pair.t1 + "," + s.pair.t2 + "," + kind_name(s.kind) + "," +
                   std::to_string(key.year) + "," + std::to_string(key.month) + ",";
            if (s.values[m]) {
                out += fmt_double(*s.values[m]);
                out += ",0\n";
            } else {
                out += ",1\n";
            }
        }
    }
    atomic_write_file(path, out);
}

std::vector<IndexSeries> load_series_csv(const std::filesystem::path& path,
                                         const MonthRange& range) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != "t1,t2,kind,year,month,value,is_missing")
        throw DataError("series csv: bad or missing header in " + path.string());
    std::vector<IndexSeries> series;
    std::map<std::string, std::size_t> index;
    long line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::vector<std::string> cols = split(line, ',');
        if (cols.size() != 7)
            throw DataError("series csv line " + std::to_string(line_number) +
                            ": expected 7 columns");
        TechPair pair{cols[0], cols[1]};
        IndexKind kind = kind_from_name(cols[2]);
        MonthKey month{static_cast<int>(parse_long(cols[3], "year")),
                       static_cast<int>(parse_long(cols[4], "month"))};
        if (!range.contains(month))
            throw DataError("series csv line " + std::to_string(line_number) +
                            ": month outside range");
        const std::string id = series_id(pair, kind);
        auto [it, inserted] = index.emplace(id, series.size());
        if (inserted) {
            IndexSeries s;
            s.pair = pair;
            s.kind = kind;
            s.values.assign(range.length(), std::nullopt);
            series.push_back(std::move(s));
        }
        const bool missing = cols[6] == "1";
        if (!missing)
            series[it->second].values[range.ordinal(month)] =
                parse_double(cols[5], "series value");
    }
    return series;
}

}  // namespace techprox
