#include "techprox/series_processing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "techprox/forecasting.hpp"
#include "techprox/numeric.hpp"
#include "techprox/util.hpp"

namespace techprox {

using nlohmann::json;

namespace {

/// Newton divided-difference interpolation through the given knots.
double newton_eval(const std::vector<std::pair<double, double>>& knots, double x) {
    const std::size_t n = knots.size();
    std::vector<double> coef(n);
    for (std::size_t i = 0; i < n; ++i) coef[i] = knots[i].second;
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = n - 1; i >= level; --i)
            coef[i] = (coef[i] - coef[i - 1]) / (knots[i].first - knots[i - level].first);
    double result = coef[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) result = result * (x - knots[i].first) + coef[i];
    return result;
}

}  // namespace

InterpolationResult interpolate(const IndexSeries& series) {
    const int n = static_cast<int>(series.values.size());
    InterpolationResult out;
    out.values.assign(n, 0.0);
    out.interpolated.assign(n, false);

    std::vector<int> present;
    for (int i = 0; i < n; ++i)
        if (series.values[i]) present.push_back(i);

    if (static_cast<int>(present.size()) < 2) {
        out.degenerate = true;
        out.rate = 1.0;
        const double fill = present.empty() ? 0.0 : std::max(0.0, *series.values[present[0]]);
        for (int i = 0; i < n; ++i) {
            out.values[i] = fill;
            out.interpolated[i] = present.empty() || i != present[0];
        }
        if (!present.empty()) out.values[present[0]] = std::max(0.0, *series.values[present[0]]);
        return out;
    }

    for (int i : present) out.values[i] = *series.values[i];

    int interpolated_count = 0;
    for (int i = 0; i < n; ++i) {
        if (series.values[i]) continue;
        out.interpolated[i] = true;
        ++interpolated_count;

        // Position of the first present knot at or after i.
        const auto right_it = std::lower_bound(present.begin(), present.end(), i);
        const int n_right = static_cast<int>(present.end() - right_it);
        const int n_left = static_cast<int>(right_it - present.begin());

        double fill;
        if (n_left == 0 || n_right == 0) {
            // Edge gap: extrapolate the line through the 2 nearest knots.
            int k0, k1;
            if (n_left == 0) {
                k0 = present[0];
                k1 = present[1];
            } else {
                k0 = present[present.size() - 2];
                k1 = present[present.size() - 1];
            }
            const double slope =
                (*series.values[k1] - *series.values[k0]) / static_cast<double>(k1 - k0);
            fill = *series.values[k0] + slope * static_cast<double>(i - k0);
        } else {
            // Interior gap: cubic through the 4 nearest knots, 2 per side when
            // available, rebalanced 3-and-1 when a side is short.
            int take_left = std::min(2, n_left);
            int take_right = std::min(2, n_right);
            if (take_left == 1) take_right = std::min(3, n_right);
            if (take_right == 1) take_left = std::min(3, n_left);
            std::vector<std::pair<double, double>> knots;
            for (int k = n_left - take_left; k < n_left; ++k)
                knots.emplace_back(static_cast<double>(present[k]), *series.values[present[k]]);
            for (int k = n_left; k < n_left + take_right; ++k)
                knots.emplace_back(static_cast<double>(present[k]), *series.values[present[k]]);
            fill = newton_eval(knots, static_cast<double>(i));
        }
        out.values[i] = std::max(0.0, fill);
    }
    out.rate = static_cast<double>(interpolated_count) / static_cast<double>(n);
    return out;
}

PolyFitResult fit_best_polynomial(const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    if (n == 0) throw DataError("cannot fit an empty series");
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = static_cast<double>(i);

    struct Candidate {
        int degree;
        std::vector<double> coefficients;
        double fit_smape;
    };
    std::vector<Candidate> candidates;
    PolyFitResult result;
    for (int degree = 0; degree <= 10; ++degree) {
        if (n < degree + 1) {
            result.skipped_degrees.push_back(degree);
            continue;
        }
        std::vector<double> coeffs;
        if (!numeric::polyfit(x, values, degree, coeffs)) {
            result.skipped_degrees.push_back(degree);
            continue;
        }
        std::vector<double> curve(n);
        for (int i = 0; i < n; ++i) curve[i] = numeric::polyval(coeffs, x[i]);
        candidates.push_back({degree, std::move(coeffs), smape(values, curve)});
    }
    if (candidates.empty()) throw DataError("all polynomial degrees were singular");

    double best = candidates.front().fit_smape;
    for (const auto& c : candidates) best = std::min(best, c.fit_smape);
    // SMAPEs within 1e-9 of the minimum are ties; the lowest degree wins.
    for (const auto& c : candidates) {
        if (c.fit_smape <= best + 1e-9) {
            result.degree = c.degree;
            result.coefficients = c.coefficients;
            result.fit_smape = c.fit_smape;
            break;
        }
    }
    return result;
}

std::vector<double> minmax_normalize(const std::vector<double>& values) {
    if (values.empty()) return {};
    const double lo = *std::min_element(values.begin(), values.end());
    double hi = 0.0;
    for (double v : values) hi = std::max(hi, v - lo);
    std::vector<double> out(values.size(), 0.0);
    if (hi > 0.0)
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / hi;
    return out;
}

std::vector<double> exp_smooth(const std::vector<double>& values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("smoothing parameter must lie in (0,1), got " + fmt_double(alpha));
    std::vector<double> out(values.size());
    if (values.empty()) return out;
    out[0] = values[0];
    // Increment form of alpha*x_t + (1-alpha)*F_{t-1}: the update vanishes
    // exactly on constant input, so constants are true fixed points.
    for (std::size_t t = 1; t < values.size(); ++t)
        out[t] = out[t - 1] + alpha * (values[t] - out[t - 1]);
    return out;
}

ProcessedSeries process_series(const IndexSeries& series, const ProcessingOptions& options) {
    ProcessedSeries out;
    out.pair = series.pair;
    out.kind = series.kind;

    InterpolationResult filled = interpolate(series);
    out.filled = std::move(filled.values);
    out.interpolated = std::move(filled.interpolated);
    out.interpolation_rate = filled.rate;

    PolyFitResult fit = fit_best_polynomial(out.filled);
    out.degree = fit.degree;
    out.coefficients = fit.coefficients;
    out.fit_smape = fit.fit_smape;
    out.skipped_degrees = fit.skipped_degrees;
    out.fitted.resize(out.filled.size());
    for (std::size_t i = 0; i < out.filled.size(); ++i)
        out.fitted[i] = numeric::polyval(out.coefficients, static_cast<double>(i));

    out.normalized = minmax_normalize(out.filled);
    out.smoothed = exp_smooth(out.normalized, options.alpha);

    out.excluded = out.interpolation_rate > options.exclusion_rate;
    out.flat = !out.excluded && numeric::mean(out.normalized) <= options.flat_mean;
    return out;
}

std::vector<ProcessedSeries> process_all(const std::vector<IndexSeries>& series,
                                         const ProcessingOptions& options, bool parallel) {
    std::vector<ProcessedSeries> out(series.size());
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
    for (long i = 0; i < static_cast<long>(series.size()); ++i)
        out[i] = process_series(series[i], options);
    return out;
}

void save_processed_csv(const std::filesystem::path& path,
                        const std::vector<ProcessedSeries>& series, const MonthRange& range) {
    std::string out = "t1,t2,kind,stage,year,month,value\n";
    for (const auto& s : series) {
        const std::pair<const char*, const std::vector<double>*> stages[] = {
            {"filled", &s.filled},
            {"fitted", &s.fitted},
            {"normalized", &s.normalized},
            {"smoothed", &s.smoothed},
        };
        for (const auto& [stage, values] : stages) {
            for (int m = 0; m < static_cast<int>(values->size()); ++m) {
                const MonthKey key = range.at(m);
                out += s.pair.t1 + "," + s.pair.t2 + "," + kind_name(s.kind) + "," + stage + "," +
                       std::to_string(key.year) + "," + std::to_string(key.month) + "," +
                       fmt_double((*values)[m]) + "\n";
            }
        }
    }
    atomic_write_file(path, out);
}

void save_processed_meta(const std::filesystem::path& path,
                         const std::vector<ProcessedSeries>& series) {
    json j = json::object();
    for (const auto& s : series) {
        json m;
        m["interpolation_rate"] = s.interpolation_rate;
        m["degree"] = s.degree;
        m["coefficients"] = s.coefficients;
        m["fit_smape"] = s.fit_smape;
        m["skipped_degrees"] = s.skipped_degrees;
        m["excluded"] = s.excluded;
        m["flat"] = s.flat;
        json interp = json::array();
        for (bool b : s.interpolated) interp.push_back(b ? 1 : 0);
        m["interpolated"] = interp;
        j[s.id()] = m;
    }
    atomic_write_file(path, j.dump(2) + "\n");
}

std::vector<ProcessedSeries> load_processed(const std::filesystem::path& csv_path,
                                            const std::filesystem::path& meta_path,
                                            const MonthRange& range) {
    std::istringstream in(read_file(csv_path));
    std::string line;
    if (!std::getline(in, line) || line != "t1,t2,kind,stage,year,month,value")
        throw DataError("processed csv: bad or missing header in " + csv_path.string());

    std::vector<ProcessedSeries> series;
    std::map<std::string, std::size_t> index;
    const int n = range.length();
    long line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::vector<std::string> cols = split(line, ',');
        if (cols.size() != 7)
            throw DataError("processed csv line " + std::to_string(line_number) +
                            ": expected 7 columns");
        TechPair pair{cols[0], cols[1]};
        IndexKind kind = kind_from_name(cols[2]);
        const std::string id = series_id(pair, kind);
        auto [it, inserted] = index.emplace(id, series.size());
        if (inserted) {
            ProcessedSeries s;
            s.pair = pair;
            s.kind = kind;
            s.filled.assign(n, 0.0);
            s.fitted.assign(n, 0.0);
            s.normalized.assign(n, 0.0);
            s.smoothed.assign(n, 0.0);
            s.interpolated.assign(n, false);
            series.push_back(std::move(s));
        }
        ProcessedSeries& s = series[it->second];
        const MonthKey month{static_cast<int>(parse_long(cols[4], "year")),
                             static_cast<int>(parse_long(cols[5], "month"))};
        if (!range.contains(month))
            throw DataError("processed csv line " + std::to_string(line_number) +
                            ": month outside range");
        const int ordinal = range.ordinal(month);
        const double value = parse_double(cols[6], "processed value");
        if (cols[3] == "filled")
            s.filled[ordinal] = value;
        else if (cols[3] == "fitted")
            s.fitted[ordinal] = value;
        else if (cols[3] == "normalized")
            s.normalized[ordinal] = value;
        else if (cols[3] == "smoothed")
            s.smoothed[ordinal] = value;
        else
            throw DataError("processed csv line " + std::to_string(line_number) +
                            ": unknown stage " + cols[3]);
    }

    json meta = json::parse(read_file(meta_path));
    for (auto& s : series) {
        if (!meta.contains(s.id()))
            throw DataError("processed metadata missing series " + s.id());
        const json& m = meta[s.id()];
        s.interpolation_rate = m.at("interpolation_rate").get<double>();
        s.degree = m.at("degree").get<int>();
        s.coefficients = m.at("coefficients").get<std::vector<double>>();
        s.fit_smape = m.at("fit_smape").get<double>();
        s.skipped_degrees = m.at("skipped_degrees").get<std::vector<int>>();
        s.excluded = m.at("excluded").get<bool>();
        s.flat = m.at("flat").get<bool>();
        const auto interp = m.at("interpolated").get<std::vector<int>>();
        s.interpolated.assign(interp.size(), false);
        for (std::size_t i = 0; i < interp.size(); ++i) s.interpolated[i] = interp[i] != 0;
    }
    return series;
}

}  // namespace techprox
