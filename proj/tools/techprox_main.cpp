#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "techprox/config.hpp"
#include "techprox/pipeline.hpp"
#include "techprox/synthetic.hpp"
#include "techprox/util.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> pair;
    std::optional<int> cluster_k;
    std::optional<int> horizon;
    std::optional<std::string> regime;
};

techprox::TechPair parse_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == text.size())
        throw techprox::ConfigError("--pair expects two technology ids as T1,T2");
    return {text.substr(0, comma), text.substr(comma + 1)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"technological-proximity pipeline: OpenAlex ingestion, five monthly "
                 "proximity indices, series processing, shape clustering, and "
                 "forecast backtesting"};
    app.require_subcommand(1);

    CliState state;
    for (const char* stage : techprox::kPipelineStages) {
        CLI::App* sub = app.add_subcommand(stage, std::string("run the ") + stage + " stage");
        sub->add_option("--config", state.config_path, "pipeline config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", state.seed, "override every stage seed");
        sub->add_option("--pair", state.pair, "case-study technology pair, T1,T2");
        sub->add_option("--k", state.cluster_k, "override the cluster count")
            ->check(CLI::PositiveNumber);
        sub->add_option("--horizon", state.horizon, "restrict forecasting to one horizon")
            ->check(CLI::IsMember({3, 6, 12}));
        sub->add_option("--regime", state.regime, "restrict forecasting to one regime")
            ->check(CLI::IsMember({"local", "cluster-rand", "cluster", "global", "transfer"}));
    }

    std::string fixture_dir;
    std::optional<std::uint64_t> fixture_seed;
    CLI::App* fixture = app.add_subcommand(
        "fixture", "write the bundled planted-convergence corpus and its config");
    fixture->add_option("dir", fixture_dir, "directory to write the fixture into")->required();
    fixture->add_option("--seed", fixture_seed, "fixture generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fixture->parsed()) {
            techprox::FixtureSpec spec;
            if (fixture_seed) spec.seed = *fixture_seed;
            techprox::write_fixture(fixture_dir, spec);
            std::cout << "fixture: wrote raw_works.jsonl, external_corpus.csv, config.ini under "
                      << fixture_dir << "\n";
            return 0;
        }
        const std::string stage = app.get_subcommands().front()->get_name();
        const techprox::PipelineConfig config = techprox::load_pipeline_config(state.config_path);
        techprox::PipelineOverrides overrides;
        overrides.seed = state.seed;
        if (state.pair) overrides.pair = parse_pair(*state.pair);
        overrides.cluster_k = state.cluster_k;
        overrides.horizon = state.horizon;
        overrides.regime = state.regime;
        techprox::run_pipeline_stage(config, stage, overrides, std::cout);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
