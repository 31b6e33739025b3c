#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "techprox/records.hpp"

namespace techprox {

enum class Granularity { Monthly, Yearly };
enum class Accumulation { Incremental, NonIncremental };

struct HVariant {
    Granularity granularity = Granularity::Monthly;
    Accumulation accumulation = Accumulation::Incremental;
};

/// Largest h such that at least h entries are >= h. Empty -> 0.
int h_index(std::vector<int> citation_counts);

/// Period key: absolute month index (year*12 + month-1) for monthly variants,
/// calendar year for yearly ones.
inline int monthly_period(MonthKey m) { return m.year * 12 + (m.month - 1); }
inline int yearly_period(MonthKey m) { return m.year; }

/// Per-author h values over periods, for one variant. Citations are resolved
/// within the corpus only; references to unknown work ids are tallied.
struct HIndexTable {
    HVariant variant;
    std::unordered_map<std::string, std::map<int, int>> by_author;  // author -> period -> h
    long unknown_refs = 0;

    /// Missing entries read as 0 (author absent or nothing published yet).
    int h_for(const std::string& author, int period) const {
        auto it = by_author.find(author);
        if (it == by_author.end()) return 0;
        auto jt = it->second.find(period);
        return jt == it->second.end() ? 0 : jt->second;
    }
};

/// Builds the table for one variant.
///   Incremental at period p: h over the author's papers published <= p, each
///   counting citations from corpus papers published <= p. An entry exists for
///   every period from the author's first paper to the end of the range.
///   Non-incremental at period p: h over the author's papers published in p
///   exactly, counting all within-corpus citations regardless of citing date.
///   Entries exist only for periods where the author published.
HIndexTable build_h_tables(const std::vector<PaperRecord>& corpus, const MonthRange& range,
                           HVariant variant);

void save_h_table_csv(const std::filesystem::path& path, const HIndexTable& table);

}  // namespace techprox
