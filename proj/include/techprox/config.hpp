#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "techprox/clustering.hpp"
#include "techprox/records.hpp"

namespace techprox {

/// Parsed key/value config text: `[section]` headers, `key = value` lines,
/// `#`/`;` full-line comments. Keys may repeat within a section.
struct ConfigDoc {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

    std::optional<std::string> find(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string require(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_all(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const;
};

ConfigDoc parse_config_text(const std::string& text);

struct PipelineConfig {
    std::filesystem::path config_path;  // resolved paths are relative to its directory
    std::uint64_t config_hash = 0;      // content hash of the config text

    // [paths]
    std::filesystem::path output_dir;
    std::filesystem::path cache_dir;
    std::filesystem::path raw_dump;             // optional: offline corpus dump
    std::filesystem::path keyword_assignments;  // optional: external keyword CSV
    std::filesystem::path external_corpus;      // optional: transfer-learning corpus

    // [catalog] + [range]
    TechnologyCatalog catalog;

    // [ingest]
    std::string endpoint = "https://api.openalex.org";
    std::string mailto;
    int per_page = 200;

    // [refine]
    double relatedness_threshold = 0.0;

    // [annotate]
    int top_k = 5;

    // [process]
    double alpha = 0.1;
    double flat_mean_threshold = 0.02;
    double exclusion_rate_threshold = 0.5;

    // [cluster]
    int cluster_k = 5;
    ClusterAlgorithm cluster_algorithm = ClusterAlgorithm::KShape;
    int cluster_max_iters = 100;

    // [forecast]
    std::vector<std::string> models;    // family names; empty = all six
    std::vector<std::string> regimes;   // regime names; empty = all applicable
    std::vector<int> horizons = {3, 6, 12};
    int lag_window = 12;
    int n_sections = 5;
    int seasonal_k = 12;
    double forecast_alpha = 0.1;
    std::vector<int> tree_depth_grid = {3};
    int n_trees = 50;
    double learning_rate = 0.1;

    // [seeds] — all required; no wall-clock fallbacks
    std::uint64_t seed_refine = 0;
    std::uint64_t seed_cluster = 0;
    std::uint64_t seed_forecast = 0;
};

/// Loads and validates a pipeline config file. Relative paths inside the
/// file resolve against the file's own directory. ConfigError on missing
/// required keys or out-of-domain values.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Same validation applied to config text (path used only for resolution).
PipelineConfig parse_pipeline_config(const std::string& text,
                                     const std::filesystem::path& path);

}  // namespace techprox
