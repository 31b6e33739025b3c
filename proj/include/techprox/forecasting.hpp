#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "techprox/proximity_indices.hpp"

namespace techprox {

/// Symmetric mean absolute percentage error in [0,200]; terms where both
/// values are zero contribute nothing.
double smape(const std::vector<double>& actual, const std::vector<double>& forecast);

struct ForecastModelSpec {
    enum class Family {
        NaiveSeasonal,
        ExponentialSmoothing,
        Theta,
        LinearRegression,
        GradientBoostedTrees,
        RandomForest,
    };
    Family family = Family::NaiveSeasonal;
    int seasonal_k = 1;         // NaiveSeasonal period
    double alpha = 0.1;         // ExponentialSmoothing level parameter
    int lag_window = 12;        // regression feature window L
    int n_trees = 50;           // RandomForest / GradientBoostedTrees
    int max_depth = 3;
    double learning_rate = 0.1; // GradientBoostedTrees shrinkage
    std::uint64_t seed = 0;

    std::string name() const;  // e.g. "naive-seasonal-k12", "random-forest"
};

bool is_statistical(ForecastModelSpec::Family family);
ForecastModelSpec::Family family_from_name(std::string_view name);

/// NaiveSeasonal repeats the last K observations; ExponentialSmoothing is
/// flat at the final level; Theta averages the trend line of the theta-0
/// decomposition with a drift- and lag-corrected SES extrapolation of the
/// theta-2 line (alpha chosen by SSE grid search), which continues exact
/// linear trends exactly.
std::vector<double> forecast_statistical(const ForecastModelSpec& spec,
                                         const std::vector<double>& history, int horizon);

// --- Regression models on lagged windows -------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    double predict(const std::vector<double>& features) const;
};

struct FittedRegression {
    ForecastModelSpec spec;
    int lag = 0;
    bool constant_fallback = false;  // degenerate design collapsed to a constant
    double constant_value = 0.0;
    std::vector<double> linear_coefficients;  // [intercept, w_1..w_L]
    std::vector<RegressionTree> trees;        // forest members or boosting stages
    double boost_base = 0.0;

    double predict(const std::vector<double>& features) const;
};

/// Trains on samples (y_{t-L..t-1} -> y_t) pooled from every training series
/// longer than the lag window. Samples are canonicalized by sorting, so the
/// fit is invariant to training-series order. Degenerate designs fall back to
/// a constant predictor (flagged).
FittedRegression train_regression(const ForecastModelSpec& spec,
                                  const std::vector<std::vector<double>>& training_series,
                                  int lag_window);

/// Recursive multi-step: predict one step, append, repeat.
std::vector<double> forecast_regression(const FittedRegression& model,
                                        const std::vector<double>& history, int horizon);

// --- Backtesting --------------------------------------------------------------

enum class Regime { Local, ClusterRandomized, ClusterAlgorithmic, Global, TransferLearning };
const char* regime_name(Regime regime);  // "local", "cluster-rand", ...
Regime regime_from_name(std::string_view name);

/// One forecastable series (processed values) with its cluster label.
struct BacktestSeries {
    std::string id;
    IndexKind kind = IndexKind::KeywordIK;
    std::vector<double> values;
    int cluster = 0;  // flat series carry the reserved label
};

inline constexpr int kFlatClusterLabel = -1;

struct SplitConfig {
    double train_fraction = 0.8;  // series-level split for regression regimes
    int n_sections = 5;           // expanding-window sections
    std::uint64_t seed = 0;
};

/// Expanding-window fold boundaries and scoring. The forecaster maps
/// (training window, fold index) to `horizon` predictions; fold windows end
/// at floor(n*i/n_sections) for i = 1..n_sections-1. Returns one SMAPE per
/// fold, or an empty list when some fold leaves fewer than `horizon` actuals.
std::vector<double> expanding_window_cv(
    const std::vector<double>& series, int horizon, int n_sections,
    const std::function<std::vector<double>(const std::vector<double>&, int)>& forecaster);

/// Convenience overload for statistical models (the local regime's shape).
std::vector<double> expanding_window_cv(const std::vector<double>& series,
                                        const ForecastModelSpec& spec, int horizon,
                                        int n_sections = 5);

struct BacktestCell {
    IndexKind kind = IndexKind::KeywordIK;
    std::string model;
    std::string regime;
    int horizon = 0;
    std::vector<double> fold_smapes;
    double median_smape = 0.0;
    double mean_smape = 0.0;
    long fold_count = 0;
    double wall_seconds = 0.0;  // whole-run time, repeated per cell; not serialized
};

struct BacktestReport {
    std::vector<BacktestCell> cells;
    long skipped_series = 0;      // too short for the fold layout
    long cluster_fallbacks = 0;   // empty training cluster, fell back to the global pool
    std::string notes;
};

/// Runs one (model family, regime, horizon) backtest over the series set.
/// `candidates` holds the hyperparameter grid (same family throughout); with
/// more than one entry the winner is chosen on an inner 80/20 split of the
/// training series by median SMAPE. Local accepts statistical families only
/// and evaluates every series; the other regimes accept regression families
/// only, split series 80/20 stratified by index kind, train per fold on the
/// training pool restricted to the fold window, and evaluate the held-out
/// series. TransferLearning trains once on the external corpus.
BacktestReport run_regime(const std::vector<BacktestSeries>& series,
                          const std::vector<ForecastModelSpec>& candidates, Regime regime,
                          int horizon, const SplitConfig& split,
                          const std::vector<std::vector<double>>* external_corpus = nullptr,
                          bool parallel = true);

void merge_report(BacktestReport& into, const BacktestReport& from);

struct HistogramBucket {
    std::string model;
    double lo = 0.0;
    double hi = 0.0;
    long count = 0;
};

/// Buckets of fold SMAPEs per model over [0,200]; the last bucket includes
/// its upper edge so the cover is exact.
std::vector<HistogramBucket> error_histogram(const BacktestReport& report, double bucket_width);

void save_report_json(const std::filesystem::path& path, const BacktestReport& report);
BacktestReport load_report_json(const std::filesystem::path& path);
void save_medians_csv(const std::filesystem::path& path, const BacktestReport& report);
void save_histogram_csv(const std::filesystem::path& path,
                        const std::vector<HistogramBucket>& buckets);

/// External corpus: CSV rows `series_id,v1,v2,...`, ragged lengths allowed.
std::vector<std::vector<double>> load_external_corpus_csv(const std::filesystem::path& path);

}  // namespace techprox
