#include "techprox/month_key.hpp"

#include <charconv>
#include <cstdio>

#include "techprox/util.hpp"

namespace techprox {

std::string format_month(MonthKey m) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", m.year, m.month);
    return buf;
}

MonthKey parse_month(std::string_view s) {
    if (s.size() != 7 || s[4] != '-') throw DataError("invalid month key: '" + std::string(s) + "'");
    MonthKey m;
    m.year = static_cast<int>(parse_long(s.substr(0, 4), "year"));
    m.month = static_cast<int>(parse_long(s.substr(5, 2), "month"));
    if (m.month < 1 || m.month > 12) throw DataError("month out of range: '" + std::string(s) + "'");
    return m;
}

bool try_parse_iso_date(std::string_view s, IsoDate& out) {
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
    auto field = [&](std::size_t pos, std::size_t len, int& v) {
        auto sub = s.substr(pos, len);
        auto [ptr, ec] = std::from_chars(sub.data(), sub.data() + sub.size(), v);
        return ec == std::errc{} && ptr == sub.data() + sub.size();
    };
    IsoDate d;
    if (!field(0, 4, d.year) || !field(5, 2, d.month) || !field(8, 2, d.day)) return false;
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return false;
    out = d;
    return true;
}

}  // namespace techprox
