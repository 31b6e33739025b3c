#include "techprox/forecasting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "techprox/numeric.hpp"
#include "techprox/util.hpp"

namespace techprox {

using nlohmann::json;

double smape(const std::vector<double>& actual, const std::vector<double>& forecast) {
    if (actual.empty() || actual.size() != forecast.size())
        throw DataError("smape needs two equal-length non-empty series");
    double total = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        const double denom = (std::abs(forecast[t]) + std::abs(actual[t])) / 2.0;
        if (denom == 0.0) continue;  // both zero: contributes nothing
        total += std::abs(forecast[t] - actual[t]) / denom;
    }
    return 100.0 * total / static_cast<double>(actual.size());
}

std::string ForecastModelSpec::name() const {
    switch (family) {
        case Family::NaiveSeasonal: return "naive-seasonal-k" + std::to_string(seasonal_k);
        case Family::ExponentialSmoothing: return "exp-smoothing";
        case Family::Theta: return "theta";
        case Family::LinearRegression: return "linear-regression";
        case Family::GradientBoostedTrees: return "gbt";
        case Family::RandomForest: return "random-forest";
    }
    return "unknown";
}

bool is_statistical(ForecastModelSpec::Family family) {
    return family == ForecastModelSpec::Family::NaiveSeasonal ||
           family == ForecastModelSpec::Family::ExponentialSmoothing ||
           family == ForecastModelSpec::Family::Theta;
}

ForecastModelSpec::Family family_from_name(std::string_view name) {
    using Family = ForecastModelSpec::Family;
    if (name == "naive-seasonal") return Family::NaiveSeasonal;
    if (name == "exp-smoothing") return Family::ExponentialSmoothing;
    if (name == "theta") return Family::Theta;
    if (name == "linear-regression") return Family::LinearRegression;
    if (name == "gbt") return Family::GradientBoostedTrees;
    if (name == "random-forest") return Family::RandomForest;
    throw ConfigError("unknown model family: " + std::string(name));
}

namespace {

double ses_final_level(const std::vector<double>& values, double alpha) {
    double level = values[0];
    for (std::size_t t = 1; t < values.size(); ++t)
        level = alpha * values[t] + (1.0 - alpha) * level;
    return level;
}

}  // namespace

std::vector<double> forecast_statistical(const ForecastModelSpec& spec,
                                         const std::vector<double>& history, int horizon) {
    using Family = ForecastModelSpec::Family;
    if (!is_statistical(spec.family))
        throw ConfigError("forecast_statistical called with a regression family");
    const int n = static_cast<int>(history.size());
    const int minimum =
        spec.family == Family::NaiveSeasonal ? std::max(spec.seasonal_k, 3) : 3;
    if (n < minimum)
        throw DataError("history of " + std::to_string(n) + " points is shorter than minimum " +
                        std::to_string(minimum) + " for " + spec.name());

    std::vector<double> out(horizon);
    switch (spec.family) {
        case Family::NaiveSeasonal: {
            const int k = spec.seasonal_k;
            for (int i = 1; i <= horizon; ++i) out[i - 1] = history[n - k + ((i - 1) % k)];
            break;
        }
        case Family::ExponentialSmoothing: {
            if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
                throw ConfigError("smoothing parameter must lie in (0,1)");
            const double level = ses_final_level(history, spec.alpha);
            for (int i = 0; i < horizon; ++i) out[i] = level;
            break;
        }
        case Family::Theta: {
            // Decompose around the OLS line: theta2[t] = 2*y[t] - line(t).
            std::vector<double> t(n);
            for (int i = 0; i < n; ++i) t[i] = static_cast<double>(i);
            double intercept = 0.0, slope = 0.0;
            numeric::fit_line(t, history, intercept, slope);
            std::vector<double> theta2(n);
            for (int i = 0; i < n; ++i) theta2[i] = 2.0 * history[i] - (intercept + slope * i);

            // SSE grid search for the SES parameter on one-step errors.
            double best_alpha = 0.01, best_sse = std::numeric_limits<double>::infinity();
            for (int step = 1; step <= 99; ++step) {
                const double alpha = step / 100.0;
                double level = theta2[0], sse = 0.0;
                for (int i = 1; i < n; ++i) {
                    const double err = theta2[i] - level;
                    sse += err * err;
                    level = alpha * theta2[i] + (1.0 - alpha) * level;
                }
                if (sse < best_sse) {
                    best_sse = sse;
                    best_alpha = alpha;
                }
            }
            const double level = ses_final_level(theta2, best_alpha);
            // The SES level lags a drifting series by slope*(1-alpha)/alpha;
            // extrapolating with that correction makes exact lines exact.
            const double lag_correction = (1.0 - best_alpha) / best_alpha;
            for (int i = 1; i <= horizon; ++i) {
                const double line_part = intercept + slope * static_cast<double>(n - 1 + i);
                const double ses_part = level + slope * (static_cast<double>(i) + lag_correction);
                out[i - 1] = 0.5 * (line_part + ses_part);
            }
            break;
        }
        default: break;
    }
    return out;
}

double RegressionTree::predict(const std::vector<double>& features) const {
    int at = 0;
    while (nodes[at].feature >= 0)
        at = features[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left
                                                                : nodes[at].right;
    return nodes[at].value;
}

double FittedRegression::predict(const std::vector<double>& features) const {
    using Family = ForecastModelSpec::Family;
    if (constant_fallback) return constant_value;
    switch (spec.family) {
        case Family::LinearRegression: {
            double y = linear_coefficients[0];
            for (int i = 0; i < lag; ++i) y += linear_coefficients[i + 1] * features[i];
            return y;
        }
        case Family::RandomForest: {
            double total = 0.0;
            for (const auto& tree : trees) total += tree.predict(features);
            return total / static_cast<double>(trees.size());
        }
        case Family::GradientBoostedTrees: {
            double y = boost_base;
            for (const auto& tree : trees) y += spec.learning_rate * tree.predict(features);
            return y;
        }
        default: break;
    }
    throw ConfigError("predict called on a statistical model spec");
}

namespace {

struct SampleSet {
    std::vector<std::vector<double>> features;  // n x L
    std::vector<double> targets;
};

SampleSet build_samples(const std::vector<std::vector<double>>& series, int lag) {
    SampleSet samples;
    for (const auto& s : series) {
        for (std::size_t t = lag; t < s.size(); ++t) {
            std::vector<double> f(s.begin() + (t - lag), s.begin() + t);
            samples.features.push_back(std::move(f));
            samples.targets.push_back(s[t]);
        }
    }
    // Canonical order: makes the fit invariant to training-series order and
    // to the iteration order samples were produced in.
    std::vector<std::size_t> order(samples.targets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (samples.features[a] != samples.features[b])
            return samples.features[a] < samples.features[b];
        return samples.targets[a] < samples.targets[b];
    });
    SampleSet sorted;
    sorted.features.reserve(order.size());
    sorted.targets.reserve(order.size());
    for (std::size_t i : order) {
        sorted.features.push_back(std::move(samples.features[i]));
        sorted.targets.push_back(samples.targets[i]);
    }
    return sorted;
}

struct TreeBuilder {
    const std::vector<std::vector<double>>& features;
    const std::vector<double>& targets;
    int max_depth;
    int features_per_split;  // 0 = all
    std::mt19937_64* rng = nullptr;
    RegressionTree tree;

    int build(std::vector<std::size_t> indices, int depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        double mean = 0.0;
        for (std::size_t i : indices) mean += targets[i];
        mean /= static_cast<double>(indices.size());
        tree.nodes[node_id].value = mean;
        if (depth >= max_depth || indices.size() < 2) return node_id;

        const int n_features = static_cast<int>(features[0].size());
        std::vector<int> candidates;
        if (features_per_split <= 0 || features_per_split >= n_features) {
            for (int f = 0; f < n_features; ++f) candidates.push_back(f);
        } else {
            std::set<int> chosen;
            while (static_cast<int>(chosen.size()) < features_per_split)
                chosen.insert(static_cast<int>(rng::pick_index(*rng, n_features)));
            candidates.assign(chosen.begin(), chosen.end());
        }

        int best_feature = -1;
        double best_threshold = 0.0, best_sse = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> sorted = indices;
        for (int f : candidates) {
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                if (features[a][f] != features[b][f]) return features[a][f] < features[b][f];
                return a < b;
            });
            // Prefix sums over targets in feature order.
            double left_sum = 0.0, left_sq = 0.0, total_sum = 0.0, total_sq = 0.0;
            for (std::size_t i : sorted) {
                total_sum += targets[i];
                total_sq += targets[i] * targets[i];
            }
            for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
                const double y = targets[sorted[pos]];
                left_sum += y;
                left_sq += y * y;
                if (features[sorted[pos]][f] == features[sorted[pos + 1]][f]) continue;
                const double nl = static_cast<double>(pos + 1);
                const double nr = static_cast<double>(sorted.size() - pos - 1);
                const double right_sum = total_sum - left_sum;
                const double right_sq = total_sq - left_sq;
                const double sse = (left_sq - left_sum * left_sum / nl) +
                                   (right_sq - right_sum * right_sum / nr);
                if (sse < best_sse) {
                    best_sse = sse;
                    best_feature = f;
                    best_threshold =
                        (features[sorted[pos]][f] + features[sorted[pos + 1]][f]) / 2.0;
                }
            }
        }
        if (best_feature < 0) return node_id;  // no informative split

        std::vector<std::size_t> left, right;
        for (std::size_t i : indices)
            (features[i][best_feature] <= best_threshold ? left : right).push_back(i);
        if (left.empty() || right.empty()) return node_id;
        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        const int left_id = build(std::move(left), depth + 1);
        tree.nodes[node_id].left = left_id;
        const int right_id = build(std::move(right), depth + 1);
        tree.nodes[node_id].right = right_id;
        return node_id;
    }
};

RegressionTree fit_tree(const std::vector<std::vector<double>>& features,
                        const std::vector<double>& targets, std::vector<std::size_t> indices,
                        int max_depth, int features_per_split, std::mt19937_64* rng) {
    TreeBuilder builder{features, targets, max_depth, features_per_split, rng, {}};
    builder.build(std::move(indices), 0);
    return std::move(builder.tree);
}

}  // namespace

FittedRegression train_regression(const ForecastModelSpec& spec,
                                  const std::vector<std::vector<double>>& training_series,
                                  int lag_window) {
    using Family = ForecastModelSpec::Family;
    if (is_statistical(spec.family))
        throw ConfigError("train_regression called with a statistical family");
    if (lag_window < 1) throw ConfigError("lag window must be >= 1");

    FittedRegression model;
    model.spec = spec;
    model.spec.lag_window = lag_window;
    model.lag = lag_window;

    SampleSet samples = build_samples(training_series, lag_window);
    const std::size_t n = samples.targets.size();
    if (n == 0)
        throw ConfigError("no training series longer than the lag window of " +
                          std::to_string(lag_window));

    const bool all_same = std::all_of(samples.features.begin(), samples.features.end(),
                                      [&](const auto& f) { return f == samples.features[0]; });
    if (all_same) {
        model.constant_fallback = true;
        model.constant_value = numeric::mean(samples.targets);
        return model;
    }

    switch (spec.family) {
        case Family::LinearRegression: {
            std::vector<double> design(n * (lag_window + 1));
            for (std::size_t i = 0; i < n; ++i) {
                design[i * (lag_window + 1)] = 1.0;
                for (int f = 0; f < lag_window; ++f)
                    design[i * (lag_window + 1) + f + 1] = samples.features[i][f];
            }
            if (n < static_cast<std::size_t>(lag_window) + 1 ||
                !numeric::least_squares(design, n, lag_window + 1, samples.targets,
                                        model.linear_coefficients)) {
                model.constant_fallback = true;
                model.constant_value = numeric::mean(samples.targets);
            }
            break;
        }
        case Family::RandomForest: {
            const int per_split = (lag_window + 2) / 3;  // ceil(L/3)
            for (int tree_i = 0; tree_i < spec.n_trees; ++tree_i) {
                std::mt19937_64 rng(fnv1a64_mix("rf-tree-" + std::to_string(tree_i), spec.seed));
                std::vector<std::size_t> bootstrap(n);
                for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng::pick_index(rng, n);
                std::sort(bootstrap.begin(), bootstrap.end());
                model.trees.push_back(fit_tree(samples.features, samples.targets,
                                               std::move(bootstrap), spec.max_depth, per_split,
                                               &rng));
            }
            break;
        }
        case Family::GradientBoostedTrees: {
            model.boost_base = numeric::mean(samples.targets);
            std::vector<double> residuals(n);
            std::vector<double> current(n, model.boost_base);
            std::vector<std::size_t> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = i;
            for (int stage = 0; stage < spec.n_trees; ++stage) {
                for (std::size_t i = 0; i < n; ++i)
                    residuals[i] = samples.targets[i] - current[i];
                RegressionTree tree =
                    fit_tree(samples.features, residuals, all, spec.max_depth, 0, nullptr);
                for (std::size_t i = 0; i < n; ++i)
                    current[i] += spec.learning_rate * tree.predict(samples.features[i]);
                model.trees.push_back(std::move(tree));
            }
            break;
        }
        default: break;
    }
    return model;
}

std::vector<double> forecast_regression(const FittedRegression& model,
                                        const std::vector<double>& history, int horizon) {
    if (static_cast<int>(history.size()) < model.lag)
        throw DataError("history of " + std::to_string(history.size()) +
                        " points is shorter than the lag window of " + std::to_string(model.lag));
    std::vector<double> window = history;
    std::vector<double> out;
    out.reserve(horizon);
    for (int i = 0; i < horizon; ++i) {
        std::vector<double> features(window.end() - model.lag, window.end());
        const double y = model.predict(features);
        out.push_back(y);
        window.push_back(y);
    }
    return out;
}

const char* regime_name(Regime regime) {
    switch (regime) {
        case Regime::Local: return "local";
        case Regime::ClusterRandomized: return "cluster-rand";
        case Regime::ClusterAlgorithmic: return "cluster";
        case Regime::Global: return "global";
        case Regime::TransferLearning: return "transfer";
    }
    return "unknown";
}

Regime regime_from_name(std::string_view name) {
    if (name == "local") return Regime::Local;
    if (name == "cluster-rand") return Regime::ClusterRandomized;
    if (name == "cluster") return Regime::ClusterAlgorithmic;
    if (name == "global") return Regime::Global;
    if (name == "transfer") return Regime::TransferLearning;
    throw ConfigError("unknown regime: " + std::string(name));
}

std::vector<double> expanding_window_cv(
    const std::vector<double>& series, int horizon, int n_sections,
    const std::function<std::vector<double>(const std::vector<double>&, int)>& forecaster) {
    if (n_sections < 2) throw ConfigError("expanding-window CV needs at least 2 sections");
    const int n = static_cast<int>(series.size());
    std::vector<int> ends;
    for (int i = 1; i < n_sections; ++i) {
        const int w = static_cast<int>(static_cast<long>(n) * i / n_sections);
        if (w < 1 || w + horizon > n) return {};  // series too short for this layout
        ends.push_back(w);
    }
    std::vector<double> smapes;
    for (std::size_t fold = 0; fold < ends.size(); ++fold) {
        const int w = ends[fold];
        const std::vector<double> window(series.begin(), series.begin() + w);
        const std::vector<double> forecast = forecaster(window, static_cast<int>(fold));
        const std::vector<double> actual(series.begin() + w, series.begin() + w + horizon);
        smapes.push_back(smape(actual, forecast));
    }
    return smapes;
}

std::vector<double> expanding_window_cv(const std::vector<double>& series,
                                        const ForecastModelSpec& spec, int horizon,
                                        int n_sections) {
    return expanding_window_cv(series, horizon, n_sections,
                               [&](const std::vector<double>& window, int) {
                                   return forecast_statistical(spec, window, horizon);
                               });
}

namespace {

/// Stratified-by-kind seeded split; returns indices (train, test).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_series(
    const std::vector<BacktestSeries>& series, const SplitConfig& split) {
    std::map<IndexKind, std::vector<std::size_t>> by_kind;
    for (std::size_t i = 0; i < series.size(); ++i) by_kind[series[i].kind].push_back(i);
    std::vector<std::size_t> train, test;
    std::mt19937_64 rng(fnv1a64_mix("series-split", split.seed));
    for (auto& [kind, members] : by_kind) {
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t n_train = static_cast<std::size_t>(split.train_fraction *
                                                       static_cast<double>(members.size()));
        if (members.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
        else n_train = members.size();
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < n_train ? train : test).push_back(members[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

std::vector<double> window_prefix(const std::vector<double>& values, int w) {
    return std::vector<double>(values.begin(),
                               values.begin() + std::min<std::size_t>(w, values.size()));
}

/// Aggregates per-series fold SMAPEs into per-kind cells.
void aggregate_cells(BacktestReport& report, const std::vector<BacktestSeries>& series,
                     const std::vector<std::size_t>& evaluated,
                     const std::vector<std::vector<double>>& per_series_folds,
                     const std::string& model, const std::string& regime, int horizon) {
    std::map<IndexKind, BacktestCell> cells;
    for (std::size_t slot = 0; slot < evaluated.size(); ++slot) {
        const BacktestSeries& s = series[evaluated[slot]];
        if (per_series_folds[slot].empty()) continue;
        BacktestCell& cell = cells[s.kind];
        cell.kind = s.kind;
        for (double v : per_series_folds[slot]) cell.fold_smapes.push_back(v);
    }
    for (auto& [kind, cell] : cells) {
        cell.model = model;
        cell.regime = regime;
        cell.horizon = horizon;
        cell.fold_count = static_cast<long>(cell.fold_smapes.size());
        cell.median_smape = numeric::median(cell.fold_smapes);
        cell.mean_smape = numeric::mean(cell.fold_smapes);
        report.cells.push_back(std::move(cell));
    }
}

}  // namespace

BacktestReport run_regime(const std::vector<BacktestSeries>& series,
                          const std::vector<ForecastModelSpec>& candidates, Regime regime,
                          int horizon, const SplitConfig& split,
                          const std::vector<std::vector<double>>* external_corpus,
                          bool parallel) {
    if (candidates.empty()) throw ConfigError("empty model candidate list");
    if (series.empty()) throw ConfigError("empty series set");
    const auto start_time = std::chrono::steady_clock::now();
    const bool statistical = is_statistical(candidates.front().family);
    if (regime == Regime::Local && !statistical)
        throw ConfigError("the local regime takes statistical models only");
    if (regime != Regime::Local && statistical)
        throw ConfigError(std::string("the ") + regime_name(regime) +
                          " regime takes regression models only");
    if (regime == Regime::TransferLearning &&
        (external_corpus == nullptr || external_corpus->empty()))
        throw ConfigError("the transfer regime needs an external corpus");

    BacktestReport report;
    report.notes = "split=series-stratified-by-kind; evaluation=expanding-window";
    const std::string regime_str = regime_name(regime);

    if (regime == Regime::Local) {
        const ForecastModelSpec& spec = candidates.front();
        std::vector<std::size_t> evaluated(series.size());
        for (std::size_t i = 0; i < series.size(); ++i) evaluated[i] = i;
        std::vector<std::vector<double>> folds(series.size());
        std::vector<char> skipped(series.size(), 0);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
        for (long i = 0; i < static_cast<long>(series.size()); ++i) {
            try {
                folds[i] = expanding_window_cv(series[i].values, spec, horizon, split.n_sections);
                if (folds[i].empty()) skipped[i] = 1;
            } catch (const DataError&) {
                skipped[i] = 1;  // window shorter than the model minimum
            }
        }
        for (char s : skipped) report.skipped_series += s;
        aggregate_cells(report, series, evaluated, folds, spec.name(), regime_str, horizon);
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                           start_time).count();
        for (auto& cell : report.cells) cell.wall_seconds = elapsed;
        return report;
    }

    // Regression regimes: series-level 80/20 split, per-fold pooled training.
    auto [train_idx, test_idx] = split_series(series, split);
    if (regime != Regime::TransferLearning && train_idx.empty())
        throw ConfigError("empty training split");

    // Hyperparameter choice on an inner 80/20 split of the training series.
    // Transfer candidates train on the external corpus instead, scored on
    // last-horizon forecasts of the whole training split.
    ForecastModelSpec chosen = candidates.front();
    if (candidates.size() > 1 && !train_idx.empty()) {
        std::vector<std::size_t> inner = train_idx;
        std::size_t n_inner_train = 0;
        if (regime != Regime::TransferLearning && inner.size() >= 2) {
            std::mt19937_64 rng(fnv1a64_mix("inner-split", split.seed));
            std::shuffle(inner.begin(), inner.end(), rng);
            n_inner_train = std::clamp<std::size_t>(
                static_cast<std::size_t>(split.train_fraction *
                                         static_cast<double>(inner.size())),
                1, inner.size() - 1);
        }
        std::vector<std::vector<double>> inner_train_values;
        for (std::size_t i = 0; i < n_inner_train; ++i)
            inner_train_values.push_back(series[inner[i]].values);
        double best_score = std::numeric_limits<double>::infinity();
        for (const auto& candidate : candidates) {
            std::vector<double> scores;
            try {
                FittedRegression model = train_regression(
                    candidate,
                    regime == Regime::TransferLearning ? *external_corpus : inner_train_values,
                    candidate.lag_window);
                for (std::size_t i = n_inner_train; i < inner.size(); ++i) {
                    const std::vector<double>& values = series[inner[i]].values;
                    const int cut = static_cast<int>(values.size()) - horizon;
                    if (cut < model.lag) continue;
                    const std::vector<double> history(values.begin(), values.begin() + cut);
                    const std::vector<double> actual(values.begin() + cut, values.end());
                    scores.push_back(smape(actual, forecast_regression(model, history, horizon)));
                }
            } catch (const ConfigError&) {
                continue;  // candidate untrainable on this pool
            }
            if (scores.empty()) continue;
            const double score = numeric::median(scores);
            if (score < best_score) {
                best_score = score;
                chosen = candidate;
            }
        }
    }

    // Group labels per series: pooled training follows these.
    std::vector<int> group(series.size(), 0);
    if (regime == Regime::ClusterAlgorithmic) {
        for (std::size_t i = 0; i < series.size(); ++i) group[i] = series[i].cluster;
    } else if (regime == Regime::ClusterRandomized) {
        // Size-matched random relabel of the algorithmic clusters.
        std::vector<int> labels;
        for (const auto& s : series) labels.push_back(s.cluster);
        std::sort(labels.begin(), labels.end());
        std::vector<std::size_t> order(series.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::mt19937_64 rng(fnv1a64_mix("cluster-rand", split.seed));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < order.size(); ++i) group[order[i]] = labels[i];
    }

    // Fold window ends, from the longest series (all pipeline series share
    // one month range, so normally every length is the same).
    std::size_t n_max = 0;
    for (const auto& s : series) n_max = std::max(n_max, s.values.size());
    std::vector<int> ends;
    for (int i = 1; i < split.n_sections; ++i)
        ends.push_back(static_cast<int>(static_cast<long>(n_max) * i / split.n_sections));

    // A pool series is usable only when its prefix outlasts the lag window.
    const auto usable_prefix = [&](std::size_t i, int w) {
        std::vector<double> p = window_prefix(series[i].values, w);
        if (static_cast<int>(p.size()) <= chosen.lag_window) p.clear();
        return p;
    };

    // Train one model per (fold, group); transfer trains once on the corpus.
    // A missing map entry means that fold had nothing to train on.
    std::map<std::pair<int, int>, FittedRegression> fold_models;
    if (regime == Regime::TransferLearning) {
        FittedRegression model = train_regression(chosen, *external_corpus, chosen.lag_window);
        for (std::size_t fold = 0; fold < ends.size(); ++fold)
            fold_models.emplace(std::make_pair(static_cast<int>(fold), 0), model);
        std::fill(group.begin(), group.end(), 0);
    } else {
        std::set<int> test_groups;
        for (std::size_t i : test_idx) test_groups.insert(group[i]);
        for (std::size_t fold = 0; fold < ends.size(); ++fold) {
            const int w = ends[fold];
            for (int g : test_groups) {
                std::vector<std::vector<double>> pool;
                for (std::size_t i : train_idx) {
                    if (group[i] != g) continue;
                    std::vector<double> p = usable_prefix(i, w);
                    if (!p.empty()) pool.push_back(std::move(p));
                }
                if (pool.empty()) {
                    ++report.cluster_fallbacks;
                    for (std::size_t i : train_idx) {
                        std::vector<double> p = usable_prefix(i, w);
                        if (!p.empty()) pool.push_back(std::move(p));
                    }
                }
                if (pool.empty()) continue;  // even the global pool is too short here
                fold_models.emplace(std::make_pair(static_cast<int>(fold), g),
                                    train_regression(chosen, pool, chosen.lag_window));
            }
        }
    }

    std::vector<std::vector<double>> folds(test_idx.size());
    std::vector<char> skipped(test_idx.size(), 0);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (long slot = 0; slot < static_cast<long>(test_idx.size()); ++slot) {
        const BacktestSeries& s = series[test_idx[slot]];
        const int g = group[test_idx[slot]];
        try {
            folds[slot] = expanding_window_cv(
                s.values, horizon, split.n_sections,
                [&](const std::vector<double>& window, int fold) {
                    auto it = fold_models.find({fold, g});
                    if (it == fold_models.end())
                        throw DataError("no trainable pool for fold " + std::to_string(fold));
                    return forecast_regression(it->second, window, horizon);
                });
            if (folds[slot].empty()) skipped[slot] = 1;
        } catch (const DataError&) {
            skipped[slot] = 1;
        }
    }
    for (char s : skipped) report.skipped_series += s;
    aggregate_cells(report, series, test_idx, folds, chosen.name(), regime_str, horizon);
    const auto elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    for (auto& cell : report.cells) cell.wall_seconds = elapsed;
    return report;
}

void merge_report(BacktestReport& into, const BacktestReport& from) {
    into.cells.insert(into.cells.end(), from.cells.begin(), from.cells.end());
    into.skipped_series += from.skipped_series;
    into.cluster_fallbacks += from.cluster_fallbacks;
    if (into.notes.empty()) into.notes = from.notes;
}

std::vector<HistogramBucket> error_histogram(const BacktestReport& report, double bucket_width) {
    if (!(bucket_width > 0.0 && bucket_width <= 200.0))
        throw ConfigError("histogram bucket width must lie in (0,200]");
    const int n_buckets = static_cast<int>(std::ceil(200.0 / bucket_width));
    std::map<std::string, std::vector<long>> counts;
    for (const auto& cell : report.cells) {
        auto& row = counts[cell.model];
        if (row.empty()) row.assign(n_buckets, 0);
        for (double v : cell.fold_smapes) {
            int b = static_cast<int>(v / bucket_width);
            if (b >= n_buckets) b = n_buckets - 1;  // the top edge closes the last bucket
            ++row[b];
        }
    }
    std::vector<HistogramBucket> buckets;
    for (const auto& [model, row] : counts)
        for (int b = 0; b < n_buckets; ++b)
            buckets.push_back({model, b * bucket_width,
                               std::min(200.0, (b + 1) * bucket_width), row[b]});
    return buckets;
}

void save_report_json(const std::filesystem::path& path, const BacktestReport& report) {
    json j;
    j["notes"] = report.notes;
    j["skipped_series"] = report.skipped_series;
    j["cluster_fallbacks"] = report.cluster_fallbacks;
    json cells = json::array();
    for (const auto& cell : report.cells) {
        json c;
        c["kind"] = kind_name(cell.kind);
        c["model"] = cell.model;
        c["regime"] = cell.regime;
        c["horizon"] = cell.horizon;
        c["fold_smapes"] = cell.fold_smapes;
        c["median_smape"] = cell.median_smape;
        c["mean_smape"] = cell.mean_smape;
        c["fold_count"] = cell.fold_count;
        cells.push_back(c);
    }
    j["cells"] = cells;
    atomic_write_file(path, j.dump(2) + "\n");
}

BacktestReport load_report_json(const std::filesystem::path& path) {
    const json j = json::parse(read_file(path));
    BacktestReport report;
    report.notes = j.value("notes", "");
    report.skipped_series = j.value("skipped_series", 0L);
    report.cluster_fallbacks = j.value("cluster_fallbacks", 0L);
    for (const auto& c : j.at("cells")) {
        BacktestCell cell;
        cell.kind = kind_from_name(c.at("kind").get<std::string>());
        cell.model = c.at("model").get<std::string>();
        cell.regime = c.at("regime").get<std::string>();
        cell.horizon = c.at("horizon").get<int>();
        cell.fold_smapes = c.at("fold_smapes").get<std::vector<double>>();
        cell.median_smape = c.at("median_smape").get<double>();
        cell.mean_smape = c.at("mean_smape").get<double>();
        cell.fold_count = c.at("fold_count").get<long>();
        report.cells.push_back(std::move(cell));
    }
    return report;
}

void save_medians_csv(const std::filesystem::path& path, const BacktestReport& report) {
    // Rows keyed (model, horizon) in first-appearance order; columns ordered
    // by the kind numbering (index1..index5).
    std::vector<std::pair<std::string, int>> rows;
    std::map<std::pair<std::string, int>, std::map<int, double>> medians;
    for (const auto& cell : report.cells) {
        const auto key = std::make_pair(cell.model, cell.horizon);
        if (!medians.count(key)) rows.push_back(key);
        medians[key][static_cast<int>(cell.kind)] = cell.median_smape;
    }
    std::string out = "algorithm,horizon,index1,index2,index3,index4,index5\n";
    for (const auto& key : rows) {
        out += key.first + "," + std::to_string(key.second);
        for (int k = 1; k <= 5; ++k) {
            out += ",";
            auto it = medians[key].find(k);
            if (it != medians[key].end()) out += fmt_double(it->second);
        }
        out += "\n";
    }
    atomic_write_file(path, out);
}

void save_histogram_csv(const std::filesystem::path& path,
                        const std::vector<HistogramBucket>& buckets) {
    std::string out = "model,bucket_lo,bucket_hi,count\n";
    for (const auto& b : buckets)
        out += b.model + "," + fmt_double(b.lo) + "," + fmt_double(b.hi) + "," +
               std::to_string(b.count) + "\n";
    atomic_write_file(path, out);
}

std::vector<std::vector<double>> load_external_corpus_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<double>> corpus;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols = split(line, ',');
        if (cols.size() < 2)
            throw DataError("external corpus line " + std::to_string(line_number) +
                            ": expected series_id plus at least one value");
        std::vector<double> values;
        for (std::size_t i = 1; i < cols.size(); ++i)
            values.push_back(parse_double(cols[i], "external corpus value"));
        corpus.push_back(std::move(values));
    }
    return corpus;
}

}  // namespace techprox
