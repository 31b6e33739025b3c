#include "techprox/author_impact.hpp"

#include <algorithm>

#include "techprox/util.hpp"

namespace techprox {

int h_index(std::vector<int> citation_counts) {
    std::sort(citation_counts.begin(), citation_counts.end(), std::greater<>());
    int h = 0;
    for (std::size_t i = 0; i < citation_counts.size(); ++i) {
        if (citation_counts[i] >= static_cast<int>(i) + 1)
            h = static_cast<int>(i) + 1;
        else
            break;
    }
    return h;
}

HIndexTable build_h_tables(const std::vector<PaperRecord>& corpus, const MonthRange& range,
                           HVariant variant) {
    HIndexTable table;
    table.variant = variant;

    const bool monthly = variant.granularity == Granularity::Monthly;
    auto period_of = [&](MonthKey m) { return monthly ? monthly_period(m) : yearly_period(m); };

    std::unordered_map<std::string, std::size_t> by_id;
    by_id.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) by_id.emplace(corpus[i].work_id, i);

    // citing_periods[i] = sorted periods of corpus papers citing paper i.
    std::vector<std::vector<int>> citing_periods(corpus.size());
    for (const auto& rec : corpus) {
        for (const auto& ref : rec.referenced_works) {
            auto it = by_id.find(ref);
            if (it == by_id.end()) {
                ++table.unknown_refs;
                continue;
            }
            citing_periods[it->second].push_back(period_of(rec.month));
        }
    }
    for (auto& periods : citing_periods) std::sort(periods.begin(), periods.end());

    // author -> their papers as (publication period, corpus index), sorted.
    std::map<std::string, std::vector<std::pair<int, std::size_t>>> papers_of;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        for (const auto& author : corpus[i].authors)
            papers_of[author].emplace_back(period_of(corpus[i].month), i);

    const int last_period = period_of(range.end);

    for (auto& [author, papers] : papers_of) {
        std::sort(papers.begin(), papers.end());
        std::map<int, int>& row = table.by_author[author];
        if (variant.accumulation == Accumulation::Incremental) {
            // Citation counts per owned paper, advanced period by period.
            std::vector<int> counts;
            std::size_t next_paper = 0;
            for (int p = papers.front().first; p <= last_period; ++p) {
                while (next_paper < papers.size() && papers[next_paper].first <= p) {
                    ++next_paper;
                    counts.push_back(0);
                }
                for (std::size_t k = 0; k < next_paper; ++k) {
                    const auto& periods = citing_periods[papers[k].second];
                    counts[k] = static_cast<int>(
                        std::upper_bound(periods.begin(), periods.end(), p) - periods.begin());
                }
                row[p] = h_index(counts);
            }
        } else {
            // Group the author's papers by publication period.
            for (std::size_t i = 0; i < papers.size();) {
                const int p = papers[i].first;
                std::vector<int> counts;
                for (; i < papers.size() && papers[i].first == p; ++i)
                    counts.push_back(static_cast<int>(citing_periods[papers[i].second].size()));
                row[p] = h_index(counts);
            }
        }
    }
    return table;
}

void save_h_table_csv(const std::filesystem::path& path, const HIndexTable& table) {
    std::string out = "author_id,period,variant,h\n";
    const std::string variant_name =
        std::string(table.variant.granularity == Granularity::Monthly ? "monthly" : "yearly") +
        "_" +
        (table.variant.accumulation == Accumulation::Incremental ? "incremental"
                                                                 : "non_incremental");
    std::map<std::string, const std::map<int, int>*> sorted;
    for (const auto& [author, row] : table.by_author) sorted.emplace(author, &row);
    for (const auto& [author, row] : sorted)
        for (const auto& [period, h] : *row)
            out += author + "," + std::to_string(period) + "," + variant_name + "," +
                   std::to_string(h) + "\n";
    atomic_write_file(path, out);
}

}  // namespace techprox
