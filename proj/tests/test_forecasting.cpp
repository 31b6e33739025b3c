#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "techprox/forecasting.hpp"
#include "techprox/numeric.hpp"
#include "techprox/util.hpp"

using namespace techprox;

namespace {

using Family = ForecastModelSpec::Family;

ForecastModelSpec spec_of(Family family) {
    ForecastModelSpec spec;
    spec.family = family;
    return spec;
}

std::vector<double> periodic12(int n) {
    std::vector<double> out(n);
    for (int t = 0; t < n; ++t)
        out[t] = 5.0 + 3.0 * std::sin(2.0 * 3.14159265358979323846 * (t % 12) / 12.0) +
                 (t % 12 == 4 ? 2.0 : 0.0);
    return out;
}

BacktestSeries backtest_series(std::string id, std::vector<double> values,
                               IndexKind kind = IndexKind::KeywordIK, int cluster = 0) {
    BacktestSeries s;
    s.id = std::move(id);
    s.kind = kind;
    s.values = std::move(values);
    s.cluster = cluster;
    return s;
}

/// Deterministic smooth-but-not-trivial evaluation data.
std::vector<double> wiggly(int n, int phase) {
    std::vector<double> out(n);
    for (int t = 0; t < n; ++t)
        out[t] = 10.0 + 0.1 * t + 2.0 * std::sin(0.3 * (t + phase)) + 0.01 * ((t * 7 + phase) % 5);
    return out;
}

}  // namespace

TEST_SUITE("forecasting") {

TEST_CASE("smape worked examples and contracts") {
    CHECK(smape({1.0}, {3.0}) == 100.0);
    CHECK(smape({0.0, 0.0}, {1.0, 0.0}) == 100.0);
    CHECK(smape({4.0, 5.0}, {4.0, 5.0}) == 0.0);
    CHECK(smape({0.0}, {0.0}) == 0.0);  // the both-zero rule alone
    CHECK(smape({0.0}, {7.0}) == 200.0);
    CHECK_THROWS_AS(smape({}, {}), DataError);
    CHECK_THROWS_AS(smape({1.0}, {1.0, 2.0}), DataError);

    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    for (int round = 0; round < 500; ++round) {
        std::vector<double> a(12), f(12);
        for (int i = 0; i < 12; ++i) {
            a[i] = value(eng);
            f[i] = value(eng);
        }
        const double s = smape(a, f);
        CHECK(s >= 0.0);
        CHECK(s <= 200.0);
        CHECK(smape(f, a) == s);
        CHECK(smape(a, a) == 0.0);
    }
}

TEST_CASE("naive seasonal repeats the last K observations") {
    ForecastModelSpec naive1 = spec_of(Family::NaiveSeasonal);
    naive1.seasonal_k = 1;
    CHECK(forecast_statistical(naive1, {5.0, 6.0, 7.0}, 3) ==
          std::vector<double>{7.0, 7.0, 7.0});

    ForecastModelSpec naive12 = spec_of(Family::NaiveSeasonal);
    naive12.seasonal_k = 12;
    // Exactly periodic data is forecast with zero error at every fold,
    // whether or not the series length is a multiple of the period.
    for (int n : {120, 123}) {
        const auto folds = expanding_window_cv(periodic12(n), naive12, 12, 5);
        REQUIRE(folds.size() == 4);
        for (double s : folds) CHECK(s == 0.0);
    }

    CHECK_THROWS_WITH_AS(forecast_statistical(naive12, periodic12(11), 3),
                         doctest::Contains("minimum 12"), DataError);
    ForecastModelSpec ses = spec_of(Family::ExponentialSmoothing);
    CHECK_THROWS_WITH_AS(forecast_statistical(ses, {1.0, 2.0}, 3),
                         doctest::Contains("minimum 3"), DataError);
}

TEST_CASE("exponential smoothing forecasts are flat at the final level") {
    ForecastModelSpec ses = spec_of(Family::ExponentialSmoothing);
    ses.alpha = 0.5;
    const auto f = forecast_statistical(ses, {0.0, 0.0, 1.0}, 4);
    REQUIRE(f.size() == 4);
    for (double v : f) CHECK(v == 0.5);  // level: 0 -> 0 -> 0.5

    const auto constant = forecast_statistical(ses, {4.0, 4.0, 4.0, 4.0}, 3);
    for (double v : constant) CHECK(v == 4.0);

    ses.alpha = 0.0;
    CHECK_THROWS_AS(forecast_statistical(ses, {1.0, 2.0, 3.0}, 1), ConfigError);
}

TEST_CASE("theta continues exact linear trends") {
    std::vector<double> line(48);
    for (int t = 0; t < 48; ++t) line[t] = 3.0 * t + 1.0;
    const auto f = forecast_statistical(spec_of(Family::Theta), line, 12);
    REQUIRE(f.size() == 12);
    for (int k = 0; k < 12; ++k)
        CHECK(std::abs(f[k] - (3.0 * (48 + k) + 1.0)) < 1e-6);

    const auto flat = forecast_statistical(spec_of(Family::Theta),
                                           std::vector<double>(24, 2.5), 6);
    for (double v : flat) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("linear regression learns the identity map from constant training series") {
    // Samples follow y_t = y_{t-1}: features and targets agree at eight levels.
    std::vector<std::vector<double>> training;
    for (int level = 1; level <= 8; ++level)
        training.push_back(std::vector<double>(4, static_cast<double>(level)));
    ForecastModelSpec spec = spec_of(Family::LinearRegression);
    const auto model = train_regression(spec, training, 1);
    CHECK_FALSE(model.constant_fallback);
    REQUIRE(model.linear_coefficients.size() == 2);
    CHECK(std::abs(model.linear_coefficients[0] - 0.0) < 1e-6);
    CHECK(std::abs(model.linear_coefficients[1] - 1.0) < 1e-6);

    const auto f = forecast_regression(model, {42.0}, 3);
    REQUIRE(f.size() == 3);
    for (double v : f) CHECK(v == doctest::Approx(42.0).epsilon(1e-9));
}

TEST_CASE("a depth-0 single-tree forest predicts the training-target mean") {
    // Distinct features, constant target: the leaf mean is bootstrap-proof.
    const std::vector<std::vector<double>> training = {{3.0, 5.0}, {4.0, 5.0}, {9.0, 5.0}};
    ForecastModelSpec spec = spec_of(Family::RandomForest);
    spec.n_trees = 1;
    spec.max_depth = 0;
    spec.seed = 11;
    const auto model = train_regression(spec, training, 1);
    CHECK(model.predict({100.0}) == 5.0);
    CHECK(model.predict({-3.0}) == 5.0);

    // With varying targets the prediction is still feature-independent and
    // bracketed by the observed targets.
    const std::vector<std::vector<double>> varied = {{1.0, 2.0}, {3.0, 6.0}, {5.0, 10.0}};
    const auto model2 = train_regression(spec, varied, 1);
    CHECK(model2.predict({0.0}) == model2.predict({99.0}));
    CHECK(model2.predict({0.0}) >= 2.0);
    CHECK(model2.predict({0.0}) <= 10.0);
}

TEST_CASE("gradient boosting starts from the target mean and reduces training error") {
    std::vector<std::vector<double>> training;
    for (int s = 0; s < 6; ++s) {
        std::vector<double> series(20);
        for (int t = 0; t < 20; ++t) series[t] = 2.0 + 0.5 * t + 3.0 * (s % 3);
        training.push_back(std::move(series));
    }
    ForecastModelSpec spec = spec_of(Family::GradientBoostedTrees);
    spec.n_trees = 40;
    spec.max_depth = 2;
    spec.learning_rate = 0.3;
    const auto model = train_regression(spec, training, 3);

    double sse_model = 0.0, sse_base = 0.0;
    for (const auto& series : training)
        for (std::size_t t = 3; t < series.size(); ++t) {
            const std::vector<double> features(series.begin() + (t - 3), series.begin() + t);
            sse_model += std::pow(model.predict(features) - series[t], 2.0);
            sse_base += std::pow(model.boost_base - series[t], 2.0);
        }
    CHECK(sse_model < 0.05 * sse_base);
}

TEST_CASE("regression fits are invariant to training-series order") {
    std::vector<std::vector<double>> forward = {wiggly(30, 0), wiggly(30, 5), wiggly(30, 11)};
    std::vector<std::vector<double>> backward = {forward[2], forward[1], forward[0]};
    const std::vector<std::vector<double>> probes = {wiggly(8, 3), wiggly(8, 21)};

    for (Family family :
         {Family::LinearRegression, Family::RandomForest, Family::GradientBoostedTrees}) {
        ForecastModelSpec spec = spec_of(family);
        spec.n_trees = 10;
        spec.max_depth = 2;
        spec.seed = 5;
        const auto a = train_regression(spec, forward, 8);
        const auto b = train_regression(spec, backward, 8);
        for (const auto& probe : probes) CHECK(a.predict(probe) == b.predict(probe));
    }
}

TEST_CASE("recursive forecasting feeds predictions back as lags") {
    FittedRegression model;
    model.lag = 1;
    model.linear_coefficients = {1.0, 1.0};  // y = 1 + previous
    model.spec = spec_of(Family::LinearRegression);
    CHECK(forecast_regression(model, {0.0}, 3) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK_THROWS_AS(forecast_regression(model, {}, 2), DataError);
}

TEST_CASE("expanding windows end at floor(n*i/sections) and see only the prefix") {
    const int n = 100;
    std::vector<double> series(n);
    for (int t = 0; t < n; ++t) series[t] = static_cast<double>(t);

    std::vector<int> window_sizes;
    const auto folds = expanding_window_cv(
        series, 3, 5, [&](const std::vector<double>& window, int fold) {
            window_sizes.push_back(static_cast<int>(window.size()));
            for (std::size_t i = 0; i < window.size(); ++i) CHECK(window[i] == series[i]);
            CHECK(fold == static_cast<int>(window_sizes.size()) - 1);
            return std::vector<double>(3, window.back());
        });
    CHECK(window_sizes == std::vector<int>{20, 40, 60, 80});
    CHECK(folds.size() == 4);

    // A layout that cannot fit every fold yields no folds at all.
    const auto too_short = expanding_window_cv(
        std::vector<double>(10, 1.0), 3, 5,
        [](const std::vector<double>&, int) { return std::vector<double>(3, 1.0); });
    CHECK(too_short.empty());

    CHECK_THROWS_AS(expanding_window_cv(series, 3, 1,
                                        [](const std::vector<double>&, int) {
                                            return std::vector<double>(3, 1.0);
                                        }),
                    ConfigError);
}

TEST_CASE("local regime scores every series and counts unusable ones") {
    std::vector<BacktestSeries> series;
    series.push_back(backtest_series("a", periodic12(120)));
    series.push_back(backtest_series("b", periodic12(123)));
    series.push_back(backtest_series("c", std::vector<double>(5, 1.0)));  // too short

    ForecastModelSpec naive12 = spec_of(Family::NaiveSeasonal);
    naive12.seasonal_k = 12;
    SplitConfig split;
    split.n_sections = 5;
    const auto report = run_regime(series, {naive12}, Regime::Local, 12, split);
    REQUIRE(report.cells.size() == 1);
    const auto& cell = report.cells.front();
    CHECK(cell.model == "naive-seasonal-k12");
    CHECK(cell.regime == "local");
    CHECK(cell.horizon == 12);
    CHECK(cell.fold_count == 8);  // 4 folds from each usable series
    for (double s : cell.fold_smapes) CHECK(s == 0.0);
    CHECK(cell.median_smape == numeric::median(cell.fold_smapes));
    CHECK(cell.mean_smape == numeric::mean(cell.fold_smapes));
    CHECK(report.skipped_series == 1);
}

TEST_CASE("regime/model family pairings are validated") {
    std::vector<BacktestSeries> series = {backtest_series("a", wiggly(60, 0))};
    SplitConfig split;
    CHECK_THROWS_AS(run_regime(series, {spec_of(Family::LinearRegression)}, Regime::Local, 3,
                               split),
                    ConfigError);
    CHECK_THROWS_AS(run_regime(series, {spec_of(Family::Theta)}, Regime::Global, 3, split),
                    ConfigError);
    CHECK_THROWS_AS(run_regime(series, {spec_of(Family::LinearRegression)},
                               Regime::TransferLearning, 3, split, nullptr),
                    ConfigError);
    CHECK_THROWS_AS(run_regime(series, {}, Regime::Local, 3, split), ConfigError);
    CHECK_THROWS_AS(run_regime({}, {spec_of(Family::Theta)}, Regime::Local, 3, split),
                    ConfigError);
}

TEST_CASE("backtests read nothing beyond the fold layout (no leakage)") {
    // n=60, 5 sections -> windows 12,24,36,48; horizon 3 -> last actual is 50.
    auto build = [](double tail_value, double early_value) {
        std::vector<BacktestSeries> series;
        for (int i = 0; i < 10; ++i) {
            auto values = wiggly(60, i);
            values[10] += early_value;
            for (int t = 51; t < 60; ++t) values[t] = tail_value;
            series.push_back(backtest_series("s" + std::to_string(i), std::move(values)));
        }
        return series;
    };
    ForecastModelSpec lin = spec_of(Family::LinearRegression);
    lin.lag_window = 3;
    SplitConfig split;
    split.seed = 9;

    const auto base = run_regime(build(0.0, 0.0), {lin}, Regime::Global, 3, split);
    const auto tails = run_regime(build(1e6, 0.0), {lin}, Regime::Global, 3, split);
    REQUIRE(base.cells.size() == 1);
    REQUIRE(tails.cells.size() == 1);
    CHECK(base.cells[0].fold_smapes == tails.cells[0].fold_smapes);

    // Positive control: perturbing data inside the folds must change scores.
    const auto early = run_regime(build(0.0, 50.0), {lin}, Regime::Global, 3, split);
    REQUIRE(early.cells.size() == 1);
    CHECK(base.cells[0].fold_smapes != early.cells[0].fold_smapes);
}

TEST_CASE("cluster regimes run deterministically and honour the external pool") {
    std::vector<BacktestSeries> series;
    for (int i = 0; i < 12; ++i)
        series.push_back(backtest_series("s" + std::to_string(i), wiggly(60, 3 * i),
                                         IndexKind::KeywordIK, i % 3));
    ForecastModelSpec lin = spec_of(Family::LinearRegression);
    lin.lag_window = 3;
    SplitConfig split;
    split.seed = 21;

    for (Regime regime : {Regime::ClusterAlgorithmic, Regime::ClusterRandomized, Regime::Global}) {
        const auto first = run_regime(series, {lin}, regime, 3, split);
        const auto second = run_regime(series, {lin}, regime, 3, split);
        REQUIRE(first.cells.size() == second.cells.size());
        for (std::size_t c = 0; c < first.cells.size(); ++c) {
            CHECK(first.cells[c].fold_smapes == second.cells[c].fold_smapes);
            CHECK(first.cells[c].regime == std::string(regime_name(regime)));
        }
    }

    std::vector<std::vector<double>> external = {wiggly(80, 1), wiggly(80, 9)};
    const auto transfer =
        run_regime(series, {lin}, Regime::TransferLearning, 3, split, &external);
    REQUIRE(transfer.cells.size() == 1);
    CHECK(transfer.cells[0].regime == "transfer");
    CHECK(transfer.cells[0].fold_count > 0);
}

TEST_CASE("hyperparameter grids with one entry never consult the inner split") {
    // Equivalent single-candidate runs are already covered; here a two-entry
    // grid must pick one of its members and report that name.
    std::vector<BacktestSeries> series;
    for (int i = 0; i < 10; ++i)
        series.push_back(backtest_series("s" + std::to_string(i), wiggly(60, 2 * i)));
    ForecastModelSpec shallow = spec_of(Family::RandomForest);
    shallow.n_trees = 5;
    shallow.max_depth = 1;
    shallow.lag_window = 3;  // the first fold window holds only 12 points
    ForecastModelSpec deep = shallow;
    deep.max_depth = 3;
    SplitConfig split;
    split.seed = 33;
    const auto report = run_regime(series, {shallow, deep}, Regime::Global, 3, split);
    REQUIRE(report.cells.size() == 1);
    CHECK(report.cells[0].model == "random-forest");
}

TEST_CASE("merged reports concatenate cells and sum the counters") {
    BacktestReport a, b;
    a.cells.push_back({IndexKind::KeywordIK, "m1", "local", 3, {1.0}, 1.0, 1.0, 1, 0.0});
    a.skipped_series = 2;
    a.cluster_fallbacks = 1;
    b.cells.push_back({IndexKind::CitationFwd, "m2", "global", 6, {2.0}, 2.0, 2.0, 1, 0.0});
    b.skipped_series = 3;
    b.cluster_fallbacks = 4;
    merge_report(a, b);
    CHECK(a.cells.size() == 2);
    CHECK(a.skipped_series == 5);
    CHECK(a.cluster_fallbacks == 5);
}

TEST_CASE("error histogram covers [0,200] with a closed top bucket") {
    BacktestReport report;
    report.cells.push_back(
        {IndexKind::KeywordIK, "m1", "local", 3, {0.0, 10.0, 200.0}, 10.0, 70.0, 3, 0.0});
    report.cells.push_back({IndexKind::KeywordIK, "m2", "local", 3, {99.9}, 99.9, 99.9, 1, 0.0});
    const auto buckets = error_histogram(report, 100.0);
    long total = 0;
    for (const auto& bucket : buckets) {
        total += bucket.count;
        if (bucket.model == "m1" && bucket.lo == 0.0) CHECK(bucket.count == 2);
        if (bucket.model == "m1" && bucket.lo == 100.0) CHECK(bucket.count == 1);  // 200 inside
        if (bucket.model == "m2" && bucket.lo == 0.0) CHECK(bucket.count == 1);
    }
    CHECK(total == 4);
}

TEST_CASE("backtest reports round-trip through JSON") {
    testutil::TempDir tmp;
    std::vector<BacktestSeries> series;
    for (int i = 0; i < 6; ++i)
        series.push_back(backtest_series("s" + std::to_string(i), wiggly(60, i),
                                         i % 2 == 0 ? IndexKind::KeywordIK
                                                    : IndexKind::CitationFwd));
    ForecastModelSpec lin = spec_of(Family::LinearRegression);
    lin.lag_window = 3;
    SplitConfig split;
    const auto report = run_regime(series, {lin}, Regime::Global, 3, split);
    save_report_json(tmp / "report.json", report);
    const auto reloaded = load_report_json(tmp / "report.json");
    REQUIRE(reloaded.cells.size() == report.cells.size());
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        CHECK(reloaded.cells[c].kind == report.cells[c].kind);
        CHECK(reloaded.cells[c].model == report.cells[c].model);
        CHECK(reloaded.cells[c].regime == report.cells[c].regime);
        CHECK(reloaded.cells[c].horizon == report.cells[c].horizon);
        CHECK(reloaded.cells[c].fold_smapes == report.cells[c].fold_smapes);
        CHECK(reloaded.cells[c].median_smape == report.cells[c].median_smape);
        CHECK(reloaded.cells[c].mean_smape == report.cells[c].mean_smape);
        CHECK(reloaded.cells[c].fold_count == report.cells[c].fold_count);
    }
    CHECK(reloaded.skipped_series == report.skipped_series);
    CHECK(reloaded.cluster_fallbacks == report.cluster_fallbacks);
    CHECK(reloaded.notes == report.notes);
}

TEST_CASE("external corpus CSV accepts ragged rows and rejects junk") {
    testutil::TempDir tmp;
    atomic_write_file(tmp / "external.csv", "a,1,2,3\nb,4.5,5\n");
    const auto rows = load_external_corpus_csv(tmp / "external.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(rows[1] == std::vector<double>{4.5, 5.0});

    atomic_write_file(tmp / "bad.csv", "a,1,zebra\n");
    CHECK_THROWS_AS(load_external_corpus_csv(tmp / "bad.csv"), DataError);
}

TEST_CASE("model and regime names round-trip") {
    ForecastModelSpec naive = spec_of(Family::NaiveSeasonal);
    naive.seasonal_k = 12;
    CHECK(naive.name() == "naive-seasonal-k12");
    CHECK(spec_of(Family::GradientBoostedTrees).name() == "gbt");
    CHECK(family_from_name("naive-seasonal") == Family::NaiveSeasonal);
    CHECK(family_from_name("random-forest") == Family::RandomForest);
    CHECK_THROWS_AS(family_from_name("prophet"), ConfigError);
    for (Regime r : {Regime::Local, Regime::ClusterRandomized, Regime::ClusterAlgorithmic,
                     Regime::Global, Regime::TransferLearning})
        CHECK(regime_from_name(regime_name(r)) == r);
    CHECK(is_statistical(Family::Theta));
    CHECK_FALSE(is_statistical(Family::RandomForest));
}

}  // TEST_SUITE
