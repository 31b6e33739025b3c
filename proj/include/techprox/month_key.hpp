#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace techprox {

/// Calendar month, the time unit every index lives on.
struct MonthKey {
    int year = 0;
    int month = 1;  // 1..12

    auto operator<=>(const MonthKey&) const = default;
};

/// Signed difference b - a in whole months.
inline int month_diff(MonthKey a, MonthKey b) {
    return (b.year - a.year) * 12 + (b.month - a.month);
}

inline MonthKey add_months(MonthKey m, int n) {
    int idx = m.year * 12 + (m.month - 1) + n;
    MonthKey out;
    out.year = idx / 12;
    out.month = idx % 12 + 1;
    if (out.month <= 0) {  // fix up toward-zero division for negative years
        out.month += 12;
        out.year -= 1;
    }
    return out;
}

std::string format_month(MonthKey m);          // "2017-05"
MonthKey parse_month(std::string_view s);      // "2017-05"

/// Inclusive month range [start, end].
struct MonthRange {
    MonthKey start;
    MonthKey end;

    int length() const { return month_diff(start, end) + 1; }
    bool contains(MonthKey m) const { return start <= m && m <= end; }
    int ordinal(MonthKey m) const { return month_diff(start, m); }
    MonthKey at(int ordinal) const { return add_months(start, ordinal); }
};

/// ISO date "YYYY-MM-DD"; day is kept because January-1 dating triggers
/// the redistribution rule.
struct IsoDate {
    int year = 0;
    int month = 0;
    int day = 0;
};

bool try_parse_iso_date(std::string_view s, IsoDate& out);

}  // namespace techprox
