#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "techprox/records.hpp"

namespace techprox {

/// Knobs for the bundled planted-convergence corpus. Defaults produce the
/// 200-record fixture the end-to-end tests run on: a flat baseline linking
/// all three technologies equally, a bridge between the first two ramping up
/// from month 120, and a handful of malformed records that exercise the
/// refinement drop rules.
struct FixtureSpec {
    std::uint64_t seed = 42;
    int baseline_papers = 176;  // one per month from the range start
    int planted_papers = 20;    // bridge papers over the final third
    int planted_start_month = 120;
    int planted_span = 55;      // last planted paper lands at start+span
};

/// Three-technology catalog over 2002-01..2016-12 (180 months).
TechnologyCatalog fixture_catalog();

/// The full fixture corpus: baseline + planted bridge + malformed records.
std::vector<RawWork> make_fixture_corpus(const FixtureSpec& spec = {});

/// Seeded external series corpus (ramps, waves, plateaus) for the
/// transfer-learning regime.
std::vector<std::vector<double>> make_external_corpus(std::uint64_t seed, int n_series,
                                                      int length);

/// Writes raw_works.jsonl, external_corpus.csv, and config.ini into dir.
/// The config points its outputs at dir/out and runs fully offline.
void write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec = {});

}  // namespace techprox
