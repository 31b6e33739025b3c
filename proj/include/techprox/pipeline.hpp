#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "techprox/config.hpp"
#include "techprox/proximity_indices.hpp"

namespace techprox {

/// Command-line overrides layered on top of the config file. Each override
/// is folded into the manifest hash of exactly the stages it influences, so
/// changing one invalidates those stages and no others.
struct PipelineOverrides {
    std::optional<std::uint64_t> seed;    // replaces every stage seed
    std::optional<TechPair> pair;         // case-study pair for `report`
    std::optional<int> cluster_k;         // replaces [cluster] k
    std::optional<int> horizon;           // restricts [forecast] horizons
    std::optional<std::string> regime;    // restricts [forecast] regimes
};

inline constexpr const char* kPipelineStages[] = {"ingest",  "refine",  "annotate", "index",
                                                  "process", "cluster", "forecast", "report"};

struct StageOutcome {
    std::string stage;
    bool skipped = false;   // manifest said the artifacts are current
    double seconds = 0.0;
};

/// Runs one pipeline stage against the config's output directory, holding
/// the directory lock for the duration. Prints progress to `log`. Throws
/// ConfigError when a predecessor stage has not produced its artifacts yet
/// (the message names the command to run) and lets stage errors propagate.
StageOutcome run_pipeline_stage(const PipelineConfig& config, const std::string& stage,
                                const PipelineOverrides& overrides, std::ostream& log);

}  // namespace techprox
