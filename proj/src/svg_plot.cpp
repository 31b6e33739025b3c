#include "techprox/svg_plot.hpp"

#include <algorithm>
#include <cmath>

#include "techprox/numeric.hpp"
#include "techprox/util.hpp"

namespace techprox {

namespace {

constexpr const char* kLayerColors[5] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return fmt_fixed(v, 2); }

const char* layer_color(IndexKind kind) { return kLayerColors[static_cast<int>(kind) - 1]; }

struct Scale {
    double lo = 0.0, hi = 1.0;     // data domain
    double px0 = 0.0, px1 = 1.0;   // pixel range
    double at(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

}  // namespace

std::string render_series_plot(const SeriesPlotData& data) {
    const int n = data.range.length();
    const double width = 960, height = 540;
    const double left = 70, right = 740, top = 50, bottom = 490;

    // Data extent across scatter points and fitted curves.
    double lo = 0.0, hi = 0.0;
    bool seen = false;
    for (const auto& layer : data.layers) {
        for (double v : layer.filled) {
            lo = seen ? std::min(lo, v) : v;
            hi = seen ? std::max(hi, v) : v;
            seen = true;
        }
        for (int i = 0; i < n; ++i) {
            const double v = numeric::polyval(layer.fit_coefficients, i);
            lo = seen ? std::min(lo, v) : v;
            hi = seen ? std::max(hi, v) : v;
            seen = true;
        }
    }
    if (!seen) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    Scale y{lo - pad, hi + pad, bottom, top};
    Scale x{0.0, static_cast<double>(std::max(n - 1, 1)), left, right};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    svg += "<rect width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num((left + right) / 2) +
           "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           xml_escape(data.t1_label) + " &amp; " + xml_escape(data.t2_label) + "</text>\n";

    // Axes.
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(right) +
           "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";

    // Year ticks at each January, thinned to at most ~12 labels.
    std::vector<int> januaries;
    for (int i = 0; i < n; ++i)
        if (data.range.at(i).month == 1) januaries.push_back(i);
    const int step = std::max<int>(1, static_cast<int>((januaries.size() + 11) / 12));
    for (std::size_t j = 0; j < januaries.size(); ++j) {
        if (j % step != 0) continue;
        const int i = januaries[j];
        const double px = x.at(i);
        svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(px) +
               "\" y2=\"" + num(bottom + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(px) + "\" y=\"" + num(bottom + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               std::to_string(data.range.at(i).year) + "</text>\n";
    }
    for (int t = 0; t <= 5; ++t) {
        const double v = y.lo + (y.hi - y.lo) * t / 5.0;
        const double py = y.at(v);
        svg += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(left) +
               "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_fixed(v, 2) + "</text>\n";
    }

    // Scatter points and fitted curves.
    for (const auto& layer : data.layers) {
        const char* color = layer_color(layer.kind);
        for (std::size_t i = 0; i < layer.filled.size(); ++i)
            svg += "<circle cx=\"" + num(x.at(static_cast<double>(i))) + "\" cy=\"" +
                   num(y.at(layer.filled[i])) + "\" r=\"2\" fill=\"" + color +
                   "\" fill-opacity=\"0.55\"/>\n";
        std::string points;
        for (int i = 0; i < n; ++i) {
            const double v = numeric::polyval(layer.fit_coefficients, i);
            points += num(x.at(i)) + "," + num(y.at(v)) + " ";
        }
        if (!points.empty()) points.pop_back();
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    }

    // Legend with per-layer interpolation rate.
    double ly = top + 10;
    for (const auto& layer : data.layers) {
        const char* color = layer_color(layer.kind);
        svg += "<rect x=\"" + num(right + 15) + "\" y=\"" + num(ly - 9) +
               "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + num(right + 32) + "\" y=\"" + num(ly + 1) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + kind_name(layer.kind) +
               " (deg " + std::to_string(layer.fit_degree) + ", interp " +
               fmt_fixed(layer.interpolation_rate * 100.0, 1) + "%)</text>\n";
        ly += 20;
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_histogram_svg(const std::string& model,
                                 const std::vector<HistogramBucket>& buckets) {
    const double width = 800, height = 420;
    const double left = 60, right = 770, top = 50, bottom = 370;
    long max_count = 1;
    for (const auto& b : buckets) max_count = std::max(max_count, b.count);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    svg += "<rect width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num((left + right) / 2) +
           "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
           xml_escape(model) + " fold error distribution</text>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(right) +
           "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";

    Scale x{0.0, 200.0, left, right};
    Scale y{0.0, static_cast<double>(max_count), bottom, top};
    for (const auto& b : buckets) {
        const double x0 = x.at(b.lo), x1 = x.at(b.hi);
        const double py = y.at(static_cast<double>(b.count));
        svg += "<rect x=\"" + num(x0 + 1) + "\" y=\"" + num(py) + "\" width=\"" +
               num(std::max(x1 - x0 - 2, 1.0)) + "\" height=\"" + num(bottom - py) +
               "\" fill=\"#4477aa\"/>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double v = 200.0 * t / 4.0;
        const double px = x.at(v);
        svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(px) +
               "\" y2=\"" + num(bottom + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(px) + "\" y=\"" + num(bottom + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_fixed(v, 0) + "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double v = static_cast<double>(max_count) * t / 4.0;
        const double py = y.at(v);
        svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_fixed(v, 0) + "</text>\n";
    }
    svg += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(height - 8) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">SMAPE</text>\n";
    svg += "</svg>\n";
    return svg;
}

namespace {

std::string html_table(const char* const (&headers)[4],
                       const std::vector<std::array<std::string, 4>>& rows) {
    std::string out = "<table>\n<tr>";
    for (const char* h : headers) out += "<th>" + xml_escape(h) + "</th>";
    out += "</tr>\n";
    for (const auto& row : rows) {
        out += "<tr>";
        for (const auto& cell : row) out += "<td>" + xml_escape(cell) + "</td>";
        out += "</tr>\n";
    }
    out += "</table>\n";
    return out;
}

}  // namespace

std::string render_case_study_html(const CaseStudyData& data) {
    const std::string title =
        xml_escape(data.t1_label) + " &amp; " + xml_escape(data.t2_label);
    std::string html;
    html += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    html += "<title>" + title + "</title>\n";
    html += "<style>\n"
            "body { font-family: sans-serif; margin: 2em auto; max-width: 1000px; }\n"
            "table { border-collapse: collapse; margin: 1em 0; }\n"
            "th, td { border: 1px solid #999; padding: 4px 10px; text-align: left; }\n"
            "th { background: #eee; }\n"
            "</style>\n</head>\n<body>\n";
    html += "<h1>" + title + "</h1>\n";
    html += "<h2>Proximity indices and fitted trends</h2>\n";
    html += data.plot_svg;
    html += "<h2>Series overview</h2>\n";
    html += html_table({"index", "fitted degree", "interpolation rate", "status"},
                       data.series_rows);
    html += "<h2>Backtest medians</h2>\n";
    html += html_table({"model", "regime", "horizon", "median SMAPE"}, data.forecast_rows);
    html += "</body>\n</html>\n";
    return html;
}

}  // namespace techprox
