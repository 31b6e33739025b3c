#include "techprox/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "techprox/forecasting.hpp"
#include "techprox/util.hpp"

namespace techprox {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::optional<std::string> ConfigDoc::find(const std::string& section,
                                           const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) return std::nullopt;
    for (const auto& [k, v] : it->second)
        if (k == key) return v;
    return std::nullopt;
}

std::string ConfigDoc::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    auto v = find(section, key);
    return v ? *v : fallback;
}

std::string ConfigDoc::require(const std::string& section, const std::string& key) const {
    auto v = find(section, key);
    if (!v || v->empty())
        throw ConfigError("config is missing required key '" + key + "' in section [" +
                          section + "]");
    return *v;
}

std::vector<std::string> ConfigDoc::get_all(const std::string& section,
                                            const std::string& key) const {
    std::vector<std::string> out;
    auto it = sections.find(section);
    if (it == sections.end()) return out;
    for (const auto& [k, v] : it->second)
        if (k == key) out.push_back(v);
    return out;
}

bool ConfigDoc::has_section(const std::string& section) const {
    return sections.count(section) > 0;
}

ConfigDoc parse_config_text(const std::string& text) {
    ConfigDoc doc;
    std::string section;
    bool in_section = false;
    long line_number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = trim(text.substr(pos, nl == std::string::npos ? nl : nl - pos));
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_number;
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw DataError("config line " + std::to_string(line_number) +
                                ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            in_section = true;
            doc.sections[section];  // record even if empty
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(line_number) +
                            ": expected 'key = value'");
        if (!in_section)
            throw DataError("config line " + std::to_string(line_number) +
                            ": key before any [section]");
        doc.sections[section].emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return doc;
}

namespace {

double config_double(const ConfigDoc& doc, const std::string& section, const std::string& key,
                     double fallback) {
    const auto v = doc.find(section, key);
    if (!v || v->empty()) return fallback;
    try {
        return parse_double(*v, key.c_str());
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' in [" + section + "] is not a number: " + *v);
    }
}

long config_long(const ConfigDoc& doc, const std::string& section, const std::string& key,
                 long fallback) {
    const auto v = doc.find(section, key);
    if (!v || v->empty()) return fallback;
    try {
        return parse_long(*v, key.c_str());
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' in [" + section +
                          "] is not an integer: " + *v);
    }
}

std::uint64_t require_seed(const ConfigDoc& doc, const std::string& key) {
    const auto v = doc.find("seeds", key);
    if (!v || v->empty())
        throw ConfigError("seeds must be explicit: add '" + key +
                          " = <integer>' to the [seeds] section");
    try {
        return static_cast<std::uint64_t>(parse_long(*v, key.c_str()));
    } catch (const std::exception&) {
        throw ConfigError("seed '" + key + "' is not an integer: " + *v);
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    if (value.empty()) return {};
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    for (const auto& part : split(csv, ',')) {
        std::string t;
        for (char c : part)
            if (!std::isspace(static_cast<unsigned char>(c))) t += c;
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

void check_range(double v, double lo, double hi, const char* what, bool open_lo = false,
                 bool open_hi = false) {
    const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
    if (!ok)
        throw ConfigError(std::string(what) + " = " + fmt_double(v) + " is outside " +
                          (open_lo ? "(" : "[") + fmt_double(lo) + ", " + fmt_double(hi) +
                          (open_hi ? ")" : "]"));
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text,
                                     const std::filesystem::path& path) {
    const ConfigDoc doc = parse_config_text(text);
    const std::filesystem::path base =
        path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    PipelineConfig cfg;
    cfg.config_path = path;
    cfg.config_hash = fnv1a64(text);

    cfg.output_dir = resolve(base, doc.require("paths", "output_dir"));
    cfg.cache_dir = resolve(base, doc.get("paths", "cache_dir", "cache"));
    cfg.raw_dump = resolve(base, doc.get("paths", "raw_dump", ""));
    cfg.keyword_assignments = resolve(base, doc.get("paths", "keyword_assignments", ""));
    cfg.external_corpus = resolve(base, doc.get("paths", "external_corpus", ""));

    for (const std::string& line : doc.get_all("catalog", "technology")) {
        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos)
            throw ConfigError("catalog entry needs '<id> <label>': " + line);
        Technology t{trim(line.substr(0, sp)), trim(line.substr(sp + 1))};
        if (t.id.empty() || t.label.empty())
            throw ConfigError("catalog entry needs '<id> <label>': " + line);
        if (cfg.catalog.has(t.id)) throw ConfigError("duplicate technology id " + t.id);
        cfg.catalog.technologies.push_back(std::move(t));
    }
    if (cfg.catalog.technologies.size() < 2)
        throw ConfigError("the catalog needs at least two technologies to form pairs");

    try {
        cfg.catalog.range.start = parse_month(doc.require("range", "start"));
        cfg.catalog.range.end = parse_month(doc.require("range", "end"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid [range]: ") + e.what());
    }
    if (cfg.catalog.range.end < cfg.catalog.range.start)
        throw ConfigError("range end precedes range start");

    cfg.endpoint = doc.get("ingest", "endpoint", cfg.endpoint);
    cfg.mailto = doc.get("ingest", "mailto", "");
    cfg.per_page = static_cast<int>(config_long(doc, "ingest", "per_page", cfg.per_page));
    if (cfg.per_page < 1 || cfg.per_page > 200)
        throw ConfigError("per_page must lie in [1, 200]");

    cfg.relatedness_threshold =
        config_double(doc, "refine", "relatedness_threshold", cfg.relatedness_threshold);
    check_range(cfg.relatedness_threshold, 0.0, 1.0, "relatedness_threshold");

    cfg.top_k = static_cast<int>(config_long(doc, "annotate", "top_k", cfg.top_k));
    if (cfg.top_k < 1) throw ConfigError("top_k must be at least 1");

    cfg.alpha = config_double(doc, "process", "alpha", cfg.alpha);
    check_range(cfg.alpha, 0.0, 1.0, "alpha", true, true);
    cfg.flat_mean_threshold =
        config_double(doc, "process", "flat_mean_threshold", cfg.flat_mean_threshold);
    check_range(cfg.flat_mean_threshold, 0.0, 1.0, "flat_mean_threshold");
    cfg.exclusion_rate_threshold =
        config_double(doc, "process", "exclusion_rate_threshold", cfg.exclusion_rate_threshold);
    check_range(cfg.exclusion_rate_threshold, 0.0, 1.0, "exclusion_rate_threshold");

    cfg.cluster_k = static_cast<int>(config_long(doc, "cluster", "k", cfg.cluster_k));
    if (cfg.cluster_k < 1) throw ConfigError("cluster k must be at least 1");
    cfg.cluster_algorithm =
        cluster_algorithm_from_name(doc.get("cluster", "algorithm", "kshape"));
    cfg.cluster_max_iters =
        static_cast<int>(config_long(doc, "cluster", "max_iters", cfg.cluster_max_iters));
    if (cfg.cluster_max_iters < 1) throw ConfigError("cluster max_iters must be at least 1");

    cfg.models = split_list(doc.get("forecast", "models", ""));
    for (const auto& m : cfg.models) family_from_name(m);  // validates
    cfg.regimes = split_list(doc.get("forecast", "regimes", ""));
    for (const auto& r : cfg.regimes) regime_from_name(r);  // validates
    const std::string horizons = doc.get("forecast", "horizons", "");
    if (!horizons.empty()) {
        cfg.horizons.clear();
        for (const auto& h : split_list(horizons))
            cfg.horizons.push_back(static_cast<int>(parse_long(h, "horizon")));
    }
    for (int h : cfg.horizons)
        if (h < 1) throw ConfigError("horizons must be positive");
    cfg.lag_window = static_cast<int>(config_long(doc, "forecast", "lag_window", cfg.lag_window));
    if (cfg.lag_window < 1) throw ConfigError("lag_window must be at least 1");
    cfg.n_sections = static_cast<int>(config_long(doc, "forecast", "n_sections", cfg.n_sections));
    if (cfg.n_sections < 2) throw ConfigError("n_sections must be at least 2");
    cfg.seasonal_k = static_cast<int>(config_long(doc, "forecast", "seasonal_k", cfg.seasonal_k));
    if (cfg.seasonal_k < 1) throw ConfigError("seasonal_k must be at least 1");
    cfg.forecast_alpha = config_double(doc, "forecast", "alpha", cfg.forecast_alpha);
    check_range(cfg.forecast_alpha, 0.0, 1.0, "forecast alpha", true, true);
    const std::string depths = doc.get("forecast", "tree_depth_grid", "");
    if (!depths.empty()) {
        cfg.tree_depth_grid.clear();
        for (const auto& d : split_list(depths))
            cfg.tree_depth_grid.push_back(static_cast<int>(parse_long(d, "tree depth")));
    }
    for (int d : cfg.tree_depth_grid)
        if (d < 0) throw ConfigError("tree depths must be non-negative");
    if (cfg.tree_depth_grid.empty()) throw ConfigError("tree_depth_grid must not be empty");
    cfg.n_trees = static_cast<int>(config_long(doc, "forecast", "n_trees", cfg.n_trees));
    if (cfg.n_trees < 1) throw ConfigError("n_trees must be at least 1");
    cfg.learning_rate = config_double(doc, "forecast", "learning_rate", cfg.learning_rate);
    check_range(cfg.learning_rate, 0.0, 1.0, "learning_rate", true, false);

    cfg.seed_refine = require_seed(doc, "refine");
    cfg.seed_cluster = require_seed(doc, "cluster");
    cfg.seed_forecast = require_seed(doc, "forecast");
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    return parse_pipeline_config(read_file(path), path);
}

}  // namespace techprox
