#pragma once

#include <array>
#include <string>
#include <vector>

#include "techprox/forecasting.hpp"
#include "techprox/month_key.hpp"
#include "techprox/proximity_indices.hpp"

namespace techprox {

struct PlotLayer {
    IndexKind kind = IndexKind::KeywordIK;
    std::vector<double> filled;            // one value per month in range
    std::vector<double> fit_coefficients;  // lowest power first
    int fit_degree = 0;
    double interpolation_rate = 0.0;
};

struct SeriesPlotData {
    std::string t1_label;
    std::string t2_label;
    MonthRange range;
    std::vector<PlotLayer> layers;
};

/// One chart: a scatter layer plus the fitted polynomial curve per index
/// kind, year-labeled axis, legend carrying each layer's interpolation rate.
/// Output is deterministic byte-for-byte for identical inputs.
std::string render_series_plot(const SeriesPlotData& data);

/// Bar chart of one model's fold-error distribution over [0, 200].
/// `buckets` must already be filtered to the named model.
std::string render_histogram_svg(const std::string& model,
                                 const std::vector<HistogramBucket>& buckets);

struct CaseStudyData {
    std::string t1_label;
    std::string t2_label;
    std::string plot_svg;  // embedded verbatim
    // kind, fitted degree, interpolation rate, status (retained/excluded/flat)
    std::vector<std::array<std::string, 4>> series_rows;
    // model, regime, horizon, median SMAPE
    std::vector<std::array<std::string, 4>> forecast_rows;
};

/// Self-contained HTML page for one technology pair.
std::string render_case_study_html(const CaseStudyData& data);

}  // namespace techprox
