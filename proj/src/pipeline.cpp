#include "techprox/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "json.hpp"
#include "techprox/author_impact.hpp"
#include "techprox/clustering.hpp"
#include "techprox/corpus_ingest.hpp"
#include "techprox/forecasting.hpp"
#include "techprox/keyword_annotation.hpp"
#include "techprox/manifest.hpp"
#include "techprox/openalex_client.hpp"
#include "techprox/series_processing.hpp"
#include "techprox/svg_plot.hpp"
#include "techprox/util.hpp"

namespace techprox {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStageVersion = "1";

/// Manifest key for a file that may live outside the output directory:
/// relative to the output dir when expressible, absolute otherwise.
std::string external_key(const fs::path& out_dir, const fs::path& p) {
    const fs::path rel = p.lexically_relative(out_dir);
    if (!rel.empty()) return rel.generic_string();
    return fs::absolute(p).lexically_normal().generic_string();
}

struct StageCtx {
    const PipelineConfig& cfg;
    const PipelineOverrides& ov;
    std::ostream& log;
    fs::path out;
    RunManifest manifest;

    std::uint64_t seed_refine() const { return ov.seed.value_or(cfg.seed_refine); }
    std::uint64_t seed_cluster() const { return ov.seed.value_or(cfg.seed_cluster); }
    std::uint64_t seed_forecast() const { return ov.seed.value_or(cfg.seed_forecast); }

    /// Per-stage manifest hash: the config text plus the overrides that
    /// affect this particular stage.
    std::string stage_hash(const std::string& stage) const {
        std::uint64_t h = fnv1a64_mix("stage:" + stage, cfg.config_hash);
        const bool seeded = stage == "refine" || stage == "cluster" || stage == "forecast";
        if (seeded && ov.seed) h = fnv1a64_mix("seed=" + std::to_string(*ov.seed), h);
        if (stage == "cluster" && ov.cluster_k)
            h = fnv1a64_mix("k=" + std::to_string(*ov.cluster_k), h);
        if (stage == "forecast" && ov.horizon)
            h = fnv1a64_mix("horizon=" + std::to_string(*ov.horizon), h);
        if (stage == "forecast" && ov.regime) h = fnv1a64_mix("regime=" + *ov.regime, h);
        if (stage == "report" && ov.pair)
            h = fnv1a64_mix("pair=" + ov.pair->t1 + "," + ov.pair->t2, h);
        return hash_hex(h);
    }

    /// Predecessor-artifact guard: every stage input produced by an earlier
    /// stage must already exist.
    void need(const fs::path& file, const char* producer) const {
        if (fs::exists(file)) return;
        throw ConfigError(external_key(out, file) + " is missing; run `techprox " +
                          std::string(producer) + " --config " + cfg.config_path.string() +
                          "` first");
    }

    ProcessingOptions processing_options() const {
        return ProcessingOptions{.alpha = cfg.alpha,
                                 .exclusion_rate = cfg.exclusion_rate_threshold,
                                 .flat_mean = cfg.flat_mean_threshold};
    }
};

// --- stage bodies -------------------------------------------------------------

void stage_ingest(StageCtx& ctx, std::vector<std::string>& inputs,
                  std::vector<std::string>& outputs) {
    std::vector<RawWork> works;
    if (!ctx.cfg.raw_dump.empty()) {
        if (!fs::exists(ctx.cfg.raw_dump))
            throw ConfigError("raw_dump file not found: " + ctx.cfg.raw_dump.string());
        inputs.push_back(external_key(ctx.out, ctx.cfg.raw_dump));
        works = load_raw_works_jsonl(ctx.cfg.raw_dump);
        ctx.log << "ingest: loaded " << works.size() << " works from local dump\n";
    } else {
        std::string contact = ctx.cfg.mailto;
        if (contact.empty())
            if (const char* env = std::getenv("TECHPROX_MAILTO")) contact = env;
        FetchOptions options;
        options.cache_dir = ctx.cfg.cache_dir;
        options.per_page = ctx.cfg.per_page;
        const FetchResult result =
            fetch_works(ctx.cfg.catalog, ctx.cfg.endpoint, contact, options);
        works = result.works;
        ctx.log << "ingest: fetched " << works.size() << " works over " << result.pages
                << " pages (" << result.network_requests << " requests, " << result.cache_hits
                << " cache hits)\n";
    }
    save_raw_works_jsonl(ctx.out / "corpus/raw_works.jsonl", works);
    outputs.push_back("corpus/raw_works.jsonl");
}

void stage_refine(StageCtx& ctx, std::vector<std::string>& inputs,
                  std::vector<std::string>& outputs) {
    const fs::path raw = ctx.out / "corpus/raw_works.jsonl";
    ctx.need(raw, "ingest");
    inputs.push_back("corpus/raw_works.jsonl");

    const std::vector<RawWork> works = load_raw_works_jsonl(raw);
    RefineOptions options;
    options.relatedness_threshold = ctx.cfg.relatedness_threshold;
    const auto [corpus, stats] =
        refine_corpus(works, ctx.cfg.catalog, ctx.seed_refine(), options);
    save_corpus_jsonl(ctx.out / "corpus/refined.jsonl", corpus);

    const json stats_json = {{"input", stats.input},
                             {"bad_date", stats.bad_date},
                             {"out_of_range", stats.out_of_range},
                             {"no_refs", stats.no_refs},
                             {"no_concepts", stats.no_concepts},
                             {"dupes_merged", stats.dupes_merged},
                             {"redistributed_from_january", stats.redistributed_from_january},
                             {"survivors", stats.survivors}};
    atomic_write_file(ctx.out / "corpus/refine_stats.json", stats_json.dump(2) + "\n");
    outputs.push_back("corpus/refined.jsonl");
    outputs.push_back("corpus/refine_stats.json");
    ctx.log << "refine: " << stats.survivors << "/" << stats.input << " survived ("
            << stats.total_dropped() << " dropped, " << stats.redistributed_from_january
            << " redistributed)\n";
}

void stage_annotate(StageCtx& ctx, std::vector<std::string>& inputs,
                    std::vector<std::string>& outputs) {
    const fs::path refined = ctx.out / "corpus/refined.jsonl";
    ctx.need(refined, "refine");
    inputs.push_back("corpus/refined.jsonl");

    std::vector<PaperRecord> corpus = load_corpus_jsonl(refined);
    if (!ctx.cfg.keyword_assignments.empty()) {
        if (!fs::exists(ctx.cfg.keyword_assignments))
            throw ConfigError("keyword_assignments file not found: " +
                              ctx.cfg.keyword_assignments.string());
        inputs.push_back(external_key(ctx.out, ctx.cfg.keyword_assignments));
        const AssignmentLoadReport report = load_assignments(ctx.cfg.keyword_assignments, corpus);
        ctx.log << "annotate: attached " << report.attached << "/" << report.rows
                << " assignment rows (" << report.rejected << " rejected, "
                << report.unknown_work_id << " unknown ids)\n";
    } else {
        ExtractorSpec spec;
        spec.top_k = ctx.cfg.top_k;
        annotate_corpus(corpus, spec);
        ctx.log << "annotate: frequency fallback, top " << ctx.cfg.top_k << " per paper\n";
    }
    save_corpus_jsonl(ctx.out / "corpus/annotated.jsonl", corpus);
    save_assignments(ctx.out / "exports/keywords.csv", corpus);
    outputs.push_back("corpus/annotated.jsonl");
    outputs.push_back("exports/keywords.csv");
}

void stage_index(StageCtx& ctx, std::vector<std::string>& inputs,
                 std::vector<std::string>& outputs) {
    const fs::path annotated = ctx.out / "corpus/annotated.jsonl";
    ctx.need(annotated, "annotate");
    inputs.push_back("corpus/annotated.jsonl");

    const std::vector<PaperRecord> corpus = load_corpus_jsonl(annotated);
    const HIndexTable h_incremental = build_h_tables(
        corpus, ctx.cfg.catalog.range, {Granularity::Monthly, Accumulation::Incremental});
    const HIndexTable h_non_incremental = build_h_tables(
        corpus, ctx.cfg.catalog.range, {Granularity::Monthly, Accumulation::NonIncremental});
    save_h_table_csv(ctx.out / "indices/h_monthly_incremental.csv", h_incremental);
    save_h_table_csv(ctx.out / "indices/h_monthly_non_incremental.csv", h_non_incremental);

    const std::vector<IndexSeries> series =
        build_all_series(corpus, ctx.cfg.catalog, h_incremental, h_non_incremental);
    save_series_csv(ctx.out / "indices/series.csv", series, ctx.cfg.catalog.range);
    outputs.push_back("indices/h_monthly_incremental.csv");
    outputs.push_back("indices/h_monthly_non_incremental.csv");
    outputs.push_back("indices/series.csv");
    ctx.log << "index: " << series.size() << " monthly series over "
            << ctx.cfg.catalog.range.length() << " months (" << h_incremental.unknown_refs
            << " unknown refs)\n";
}

void stage_process(StageCtx& ctx, std::vector<std::string>& inputs,
                   std::vector<std::string>& outputs) {
    const fs::path series_csv = ctx.out / "indices/series.csv";
    ctx.need(series_csv, "index");
    inputs.push_back("indices/series.csv");

    const std::vector<IndexSeries> series = load_series_csv(series_csv, ctx.cfg.catalog.range);
    const std::vector<ProcessedSeries> processed =
        process_all(series, ctx.processing_options());
    save_processed_csv(ctx.out / "processed/processed.csv", processed, ctx.cfg.catalog.range);
    save_processed_meta(ctx.out / "processed/meta.json", processed);
    outputs.push_back("processed/processed.csv");
    outputs.push_back("processed/meta.json");

    long excluded = 0, flat = 0;
    for (const auto& p : processed) {
        excluded += p.excluded;
        flat += p.flat;
    }
    ctx.log << "process: " << processed.size() << " series (" << excluded << " excluded, "
            << flat << " flat)\n";
}

std::vector<ProcessedSeries> load_processed_stage(StageCtx& ctx,
                                                  std::vector<std::string>& inputs,
                                                  const char* producer) {
    const fs::path csv = ctx.out / "processed/processed.csv";
    const fs::path meta = ctx.out / "processed/meta.json";
    ctx.need(csv, producer);
    ctx.need(meta, producer);
    inputs.push_back("processed/processed.csv");
    inputs.push_back("processed/meta.json");
    return load_processed(csv, meta, ctx.cfg.catalog.range);
}

void stage_cluster(StageCtx& ctx, std::vector<std::string>& inputs,
                   std::vector<std::string>& outputs) {
    const std::vector<ProcessedSeries> processed = load_processed_stage(ctx, inputs, "process");

    std::vector<ClusterSeries> pool;
    for (const auto& p : processed)
        if (!p.excluded && !p.flat) pool.push_back({p.id(), p.smoothed});
    const int k = ctx.ov.cluster_k.value_or(ctx.cfg.cluster_k);

    for (ClusterAlgorithm algorithm :
         {ClusterAlgorithm::KMeansL1, ClusterAlgorithm::KMedoids, ClusterAlgorithm::KShape}) {
        const std::string name = cluster_algorithm_name(algorithm);
        const ClusterAssignment assignment =
            run_clustering(algorithm, pool, k, ctx.seed_cluster(), ctx.cfg.cluster_max_iters);
        save_assignment_csv(ctx.out / ("cluster/assignments_" + name + ".csv"), assignment);
        outputs.push_back("cluster/assignments_" + name + ".csv");

        std::vector<int> labels;
        labels.reserve(pool.size());
        for (const auto& s : pool) labels.push_back(assignment.labels.at(s.id));
        const SilhouetteReport sil = silhouette(pool, labels, cluster_metric(algorithm));
        save_silhouette_json(ctx.out / ("cluster/silhouette_" + name + ".json"), sil);
        outputs.push_back("cluster/silhouette_" + name + ".json");

        const CentroidLayout layout = centroid_layout(assignment, cluster_metric(algorithm));
        save_layout_csv(ctx.out / ("cluster/layout_" + name + ".csv"), layout);
        outputs.push_back("cluster/layout_" + name + ".csv");

        ctx.log << "cluster: " << name << " k=" << assignment.k << " in "
                << assignment.iterations << " iterations, mean silhouette "
                << fmt_fixed(sil.global_mean, 4) << "\n";
    }
    ctx.log << "cluster: " << pool.size() << " series clustered ("
            << processed.size() - pool.size() << " flat/excluded held out)\n";
}

/// Applicable model families for a regime: Local backtests the statistical
/// ones, every other regime the regression ones.
bool family_applies(ForecastModelSpec::Family family, Regime regime) {
    return is_statistical(family) == (regime == Regime::Local);
}

std::vector<ForecastModelSpec> candidate_grid(ForecastModelSpec::Family family,
                                              const StageCtx& ctx) {
    using Family = ForecastModelSpec::Family;
    ForecastModelSpec base;
    base.family = family;
    base.seasonal_k = ctx.cfg.seasonal_k;
    base.alpha = ctx.cfg.forecast_alpha;
    base.lag_window = ctx.cfg.lag_window;
    base.n_trees = ctx.cfg.n_trees;
    base.learning_rate = ctx.cfg.learning_rate;
    base.seed = ctx.seed_forecast();
    if (family != Family::GradientBoostedTrees && family != Family::RandomForest) return {base};
    std::vector<ForecastModelSpec> grid;
    for (int depth : ctx.cfg.tree_depth_grid) {
        base.max_depth = depth;
        grid.push_back(base);
    }
    return grid;
}

void stage_forecast(StageCtx& ctx, std::vector<std::string>& inputs,
                    std::vector<std::string>& outputs) {
    const std::vector<ProcessedSeries> processed = load_processed_stage(ctx, inputs, "process");

    const std::string algorithm_name = cluster_algorithm_name(ctx.cfg.cluster_algorithm);
    const fs::path assignments_csv =
        ctx.out / ("cluster/assignments_" + algorithm_name + ".csv");
    ctx.need(assignments_csv, "cluster");
    inputs.push_back("cluster/assignments_" + algorithm_name + ".csv");
    const ClusterAssignment assignment = load_assignment_csv(assignments_csv);

    std::vector<BacktestSeries> series;
    for (const auto& p : processed) {
        if (p.excluded) continue;
        BacktestSeries s;
        s.id = p.id();
        s.kind = p.kind;
        s.values = p.smoothed;
        if (p.flat) {
            s.cluster = kFlatClusterLabel;
        } else {
            const auto it = assignment.labels.find(s.id);
            if (it == assignment.labels.end())
                throw DataError("series " + s.id + " missing from " +
                                external_key(ctx.out, assignments_csv) +
                                "; re-run `techprox cluster`");
            s.cluster = it->second;
        }
        series.push_back(std::move(s));
    }

    std::vector<std::string> regimes;
    if (ctx.ov.regime) {
        regimes = {*ctx.ov.regime};
    } else if (!ctx.cfg.regimes.empty()) {
        regimes = ctx.cfg.regimes;
    } else {
        regimes = {"local", "cluster-rand", "cluster", "global"};
        if (!ctx.cfg.external_corpus.empty()) regimes.push_back("transfer");
    }
    std::vector<int> horizons =
        ctx.ov.horizon ? std::vector<int>{*ctx.ov.horizon} : ctx.cfg.horizons;
    std::vector<std::string> families = ctx.cfg.models;
    if (families.empty())
        families = {"naive-seasonal", "exp-smoothing",    "theta",
                    "linear-regression", "gbt", "random-forest"};

    std::vector<std::vector<double>> external;
    const std::vector<std::vector<double>>* external_ptr = nullptr;
    for (const auto& r : regimes) {
        if (regime_from_name(r) != Regime::TransferLearning) continue;
        if (ctx.cfg.external_corpus.empty())
            throw ConfigError(
                "the transfer regime needs an external series corpus; set "
                "external_corpus under [paths]");
        if (!fs::exists(ctx.cfg.external_corpus))
            throw ConfigError("external_corpus file not found: " +
                              ctx.cfg.external_corpus.string());
        inputs.push_back(external_key(ctx.out, ctx.cfg.external_corpus));
        external = load_external_corpus_csv(ctx.cfg.external_corpus);
        external_ptr = &external;
        break;
    }

    SplitConfig split;
    split.n_sections = ctx.cfg.n_sections;
    split.seed = ctx.seed_forecast();

    BacktestReport total;
    for (const auto& regime_str : regimes) {
        const Regime regime = regime_from_name(regime_str);
        for (int horizon : horizons) {
            for (const auto& family_name : families) {
                const auto family = family_from_name(family_name);
                if (!family_applies(family, regime)) continue;
                const BacktestReport report = run_regime(
                    series, candidate_grid(family, ctx), regime, horizon, split, external_ptr);
                merge_report(total, report);
            }
        }
    }
    save_report_json(ctx.out / "forecast/report.json", total);
    outputs.push_back("forecast/report.json");
    ctx.log << "forecast: " << total.cells.size() << " cells over " << series.size()
            << " series (" << total.skipped_series << " skipped, " << total.cluster_fallbacks
            << " cluster fallbacks)\n";
}

const Technology& technology_or_throw(const TechnologyCatalog& catalog, const std::string& id) {
    for (const auto& t : catalog.technologies)
        if (t.id == id) return t;
    throw ConfigError("technology id '" + id + "' is not in the catalog");
}

void stage_report(StageCtx& ctx, std::vector<std::string>& inputs,
                  std::vector<std::string>& outputs) {
    const std::vector<ProcessedSeries> processed = load_processed_stage(ctx, inputs, "process");
    const fs::path report_json = ctx.out / "forecast/report.json";
    ctx.need(report_json, "forecast");
    inputs.push_back("forecast/report.json");
    const BacktestReport backtests = load_report_json(report_json);

    std::map<std::string, const ProcessedSeries*> by_id;
    for (const auto& p : processed) by_id[p.id()] = &p;

    const auto layers_for = [&](const std::string& t1, const std::string& t2) {
        std::vector<PlotLayer> layers;
        for (IndexKind kind : kAllIndexKinds) {
            const auto it = by_id.find(series_id({t1, t2}, kind));
            if (it == by_id.end()) continue;
            const ProcessedSeries& p = *it->second;
            layers.push_back({p.kind, p.filled, p.coefficients, p.degree,
                              p.interpolation_rate});
        }
        return layers;
    };

    // (a) one five-index chart per unordered technology pair
    const auto& techs = ctx.cfg.catalog.technologies;
    for (std::size_t i = 0; i < techs.size(); ++i) {
        for (std::size_t j = i + 1; j < techs.size(); ++j) {
            SeriesPlotData data;
            data.t1_label = techs[i].label;
            data.t2_label = techs[j].label;
            data.range = ctx.cfg.catalog.range;
            data.layers = layers_for(techs[i].id, techs[j].id);
            const std::string file = "report/plot_" + techs[i].id + "_" + techs[j].id + ".svg";
            atomic_write_file(ctx.out / file, render_series_plot(data));
            outputs.push_back(file);
        }
    }

    // (b) median tables and (c) error histograms
    save_medians_csv(ctx.out / "report/medians.csv", backtests);
    outputs.push_back("report/medians.csv");
    const std::vector<HistogramBucket> buckets = error_histogram(backtests, 10.0);
    save_histogram_csv(ctx.out / "report/histogram.csv", buckets);
    outputs.push_back("report/histogram.csv");
    std::map<std::string, std::vector<HistogramBucket>> by_model;
    for (const auto& b : buckets) by_model[b.model].push_back(b);
    for (const auto& [model, model_buckets] : by_model) {
        const std::string file = "report/hist_" + model + ".svg";
        atomic_write_file(ctx.out / file, render_histogram_svg(model, model_buckets));
        outputs.push_back(file);
    }

    // (d) the case-study page for one named pair
    const TechPair pair =
        ctx.ov.pair ? *ctx.ov.pair : TechPair{techs[0].id, techs[1].id};
    const Technology& t1 = technology_or_throw(ctx.cfg.catalog, pair.t1);
    const Technology& t2 = technology_or_throw(ctx.cfg.catalog, pair.t2);
    CaseStudyData study;
    study.t1_label = t1.label;
    study.t2_label = t2.label;
    SeriesPlotData pair_data{t1.label, t2.label, ctx.cfg.catalog.range,
                             layers_for(pair.t1, pair.t2)};
    if (pair_data.layers.empty())
        throw ConfigError("no processed series for pair " + pair.t1 + "," + pair.t2 +
                          "; nothing to report on");
    study.plot_svg = render_series_plot(pair_data);
    for (IndexKind kind : kAllIndexKinds) {
        const auto it = by_id.find(series_id({pair.t1, pair.t2}, kind));
        if (it == by_id.end()) continue;
        const ProcessedSeries& p = *it->second;
        const char* status = p.excluded ? "excluded" : (p.flat ? "flat" : "retained");
        study.series_rows.push_back({kind_name(kind), std::to_string(p.degree),
                                     fmt_fixed(p.interpolation_rate * 100.0, 1) + "%", status});
    }
    for (const auto& cell : backtests.cells)
        study.forecast_rows.push_back(
            {cell.model + " · " + kind_name(cell.kind), cell.regime,
             std::to_string(cell.horizon), fmt_fixed(cell.median_smape, 2)});
    const std::string study_file = "report/case_study_" + pair.t1 + "_" + pair.t2 + ".html";
    atomic_write_file(ctx.out / study_file, render_case_study_html(study));
    outputs.push_back(study_file);
    ctx.log << "report: " << outputs.size() << " artifacts for " << techs.size()
            << " technologies\n";
}

}  // namespace

StageOutcome run_pipeline_stage(const PipelineConfig& config, const std::string& stage,
                                const PipelineOverrides& overrides, std::ostream& log) {
    using Body = void (*)(StageCtx&, std::vector<std::string>&, std::vector<std::string>&);
    static const std::map<std::string, Body> bodies = {
        {"ingest", stage_ingest},   {"refine", stage_refine},
        {"annotate", stage_annotate}, {"index", stage_index},
        {"process", stage_process}, {"cluster", stage_cluster},
        {"forecast", stage_forecast}, {"report", stage_report}};
    const auto body = bodies.find(stage);
    if (body == bodies.end()) throw ConfigError("unknown pipeline stage: " + stage);

    fs::create_directories(config.output_dir);
    DirLock lock(config.output_dir);

    StageCtx ctx{config, overrides, log, config.output_dir,
                 load_manifest(config.output_dir / "manifest.json")};
    const std::string version_hash = ctx.stage_hash(stage);

    StageOutcome outcome;
    outcome.stage = stage;
    if (stage_up_to_date(ctx.manifest, stage, kStageVersion, version_hash, ctx.out)) {
        log << stage << ": skipped (up-to-date)\n";
        outcome.skipped = true;
        return outcome;
    }

    const auto started = std::chrono::steady_clock::now();
    std::vector<std::string> inputs, outputs;
    body->second(ctx, inputs, outputs);
    // Sweep outputs a previous run of this stage produced but this run did
    // not (e.g. a different case-study pair), so every file in the output
    // dir stays traceable to a manifest entry.
    if (const auto prev = ctx.manifest.stages.find(stage); prev != ctx.manifest.stages.end()) {
        const std::set<std::string> current(outputs.begin(), outputs.end());
        for (const auto& [path, hash] : prev->second.outputs)
            if (!current.count(path)) fs::remove(ctx.out / path);
    }
    ctx.manifest.stages[stage] =
        make_stage_record(kStageVersion, version_hash, inputs, outputs, ctx.out);
    save_manifest(ctx.out / "manifest.json", ctx.manifest);
    outcome.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log << stage << ": done in " << fmt_fixed(outcome.seconds, 2) << "s\n";
    return outcome;
}

}  // namespace techprox
