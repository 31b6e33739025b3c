#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace techprox {

/// One pipeline stage's provenance: what configuration and input bytes
/// produced which output bytes, and when.
struct StageRecord {
    std::string stage_version;  // bumped when a stage's logic changes
    std::string config_hash;    // hex of the config text hash
    std::map<std::string, std::string> inputs;   // relative path -> content hash (hex)
    std::map<std::string, std::string> outputs;  // relative path -> content hash (hex)
    std::string timestamp;      // ISO-8601 UTC; informational, never compared
};

struct RunManifest {
    std::map<std::string, StageRecord> stages;
};

std::string hash_hex(std::uint64_t h);
std::string file_hash_hex(const std::filesystem::path& path);

/// Missing file loads as an empty manifest.
RunManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// True when the recorded stage matches the given config hash and version,
/// every input file still hashes to its recorded value, and every recorded
/// output exists with its recorded hash. Paths are relative to base_dir.
bool stage_up_to_date(const RunManifest& manifest, const std::string& stage,
                      const std::string& stage_version, const std::string& config_hash,
                      const std::filesystem::path& base_dir);

/// Builds a fresh record from current file contents (all paths relative to
/// base_dir; missing inputs are an error, listed outputs must exist).
StageRecord make_stage_record(const std::string& stage_version, const std::string& config_hash,
                              const std::vector<std::string>& inputs,
                              const std::vector<std::string>& outputs,
                              const std::filesystem::path& base_dir);

}  // namespace techprox
