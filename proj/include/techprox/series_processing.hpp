#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "techprox/proximity_indices.hpp"

namespace techprox {

struct ProcessingOptions {
    double alpha = 0.1;            // exponential smoothing parameter
    double exclusion_rate = 0.5;   // excluded when interpolation rate is strictly above
    double flat_mean = 0.02;       // flat when mean(normalized) <= this
};

struct InterpolationResult {
    std::vector<double> values;
    std::vector<bool> interpolated;  // per-month provenance
    double rate = 0.0;               // interpolated months / total months
    bool degenerate = false;         // fewer than 2 present values
};

/// Fills missing months: interior gaps with the cubic through the 4 nearest
/// present knots (2 per side; 3-and-1 when a side has only one) via Newton
/// divided differences, leading/trailing gaps by linear extrapolation from the
/// 2 nearest knots. Negative fills are clipped to 0. Series with fewer than 2
/// present values are filled constant (or zero) with rate forced to 1.0.
InterpolationResult interpolate(const IndexSeries& series);

struct PolyFitResult {
    int degree = 0;
    std::vector<double> coefficients;  // lowest power first
    double fit_smape = 0.0;
    std::vector<int> skipped_degrees;  // numerically singular fits
};

/// Least-squares fits of degree 0..10 on the 0-based month ordinal, scored by
/// SMAPE between curve and values; minimal SMAPE wins, ties (within 1e-9)
/// resolved toward the lowest degree.
PolyFitResult fit_best_polynomial(const std::vector<double>& values);

/// (x - min) / max(x - min); all zeros when the series is constant.
std::vector<double> minmax_normalize(const std::vector<double>& values);

/// F_1 = x_1, F_t = alpha*x_t + (1-alpha)*F_{t-1}. alpha outside (0,1) is a
/// ConfigError.
std::vector<double> exp_smooth(const std::vector<double>& values, double alpha = 0.1);

struct ProcessedSeries {
    TechPair pair;
    IndexKind kind = IndexKind::KeywordIK;
    std::vector<double> filled;
    std::vector<bool> interpolated;
    double interpolation_rate = 0.0;
    int degree = 0;
    std::vector<double> coefficients;
    double fit_smape = 0.0;
    std::vector<int> skipped_degrees;
    std::vector<double> fitted;      // polynomial evaluated per month
    std::vector<double> normalized;  // min-max over filled
    std::vector<double> smoothed;    // exp_smooth over normalized
    bool excluded = false;           // interpolation rate > exclusion threshold
    bool flat = false;               // mean(normalized) <= flat threshold

    std::string id() const { return series_id(pair, kind); }
};

ProcessedSeries process_series(const IndexSeries& series, const ProcessingOptions& options = {});

/// Processes every series; `parallel` selects the OpenMP kernel (identical
/// output either way).
std::vector<ProcessedSeries> process_all(const std::vector<IndexSeries>& series,
                                         const ProcessingOptions& options = {},
                                         bool parallel = true);

/// Stage CSV (`t1,t2,kind,stage,year,month,value`, stages filled|fitted|
/// normalized|smoothed) plus a metadata JSON (rate, degree, coefficients,
/// flags) per series.
void save_processed_csv(const std::filesystem::path& path,
                        const std::vector<ProcessedSeries>& series, const MonthRange& range);
void save_processed_meta(const std::filesystem::path& path,
                         const std::vector<ProcessedSeries>& series);
std::vector<ProcessedSeries> load_processed(const std::filesystem::path& csv_path,
                                            const std::filesystem::path& meta_path,
                                            const MonthRange& range);

}  // namespace techprox
