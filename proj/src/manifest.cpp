#include "techprox/manifest.hpp"

#include <chrono>
#include <ctime>

#include "json.hpp"
#include "techprox/util.hpp"

namespace techprox {

using nlohmann::json;

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string file_hash_hex(const std::filesystem::path& path) {
    return hash_hex(hash_file(path));
}

RunManifest load_manifest(const std::filesystem::path& path) {
    RunManifest manifest;
    if (!std::filesystem::exists(path)) return manifest;
    const json j = json::parse(read_file(path));
    // items() must iterate named values: a temporary from value() dies
    // before the loop body reads it.
    const json stages = j.value("stages", json::object());
    for (const auto& [stage, record] : stages.items()) {
        StageRecord r;
        r.stage_version = record.value("stage_version", "");
        r.config_hash = record.value("config_hash", "");
        r.timestamp = record.value("timestamp", "");
        const json inputs = record.value("inputs", json::object());
        for (const auto& [p, h] : inputs.items()) r.inputs[p] = h.get<std::string>();
        const json outputs = record.value("outputs", json::object());
        for (const auto& [p, h] : outputs.items()) r.outputs[p] = h.get<std::string>();
        manifest.stages[stage] = std::move(r);
    }
    return manifest;
}

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    json stages = json::object();
    for (const auto& [stage, r] : manifest.stages) {
        json record;
        record["stage_version"] = r.stage_version;
        record["config_hash"] = r.config_hash;
        record["inputs"] = json(r.inputs);
        record["outputs"] = json(r.outputs);
        record["timestamp"] = r.timestamp;
        stages[stage] = record;
    }
    json j;
    j["stages"] = stages;
    atomic_write_file(path, j.dump(2) + "\n");
}

bool stage_up_to_date(const RunManifest& manifest, const std::string& stage,
                      const std::string& stage_version, const std::string& config_hash,
                      const std::filesystem::path& base_dir) {
    auto it = manifest.stages.find(stage);
    if (it == manifest.stages.end()) return false;
    const StageRecord& r = it->second;
    if (r.stage_version != stage_version || r.config_hash != config_hash) return false;
    const auto matches = [&](const std::map<std::string, std::string>& files) {
        for (const auto& [rel, recorded] : files) {
            const std::filesystem::path p = base_dir / rel;
            if (!std::filesystem::exists(p)) return false;
            if (file_hash_hex(p) != recorded) return false;
        }
        return true;
    };
    return matches(r.inputs) && matches(r.outputs);
}

StageRecord make_stage_record(const std::string& stage_version, const std::string& config_hash,
                              const std::vector<std::string>& inputs,
                              const std::vector<std::string>& outputs,
                              const std::filesystem::path& base_dir) {
    StageRecord r;
    r.stage_version = stage_version;
    r.config_hash = config_hash;
    for (const auto& rel : inputs) r.inputs[rel] = file_hash_hex(base_dir / rel);
    for (const auto& rel : outputs) r.outputs[rel] = file_hash_hex(base_dir / rel);

    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    r.timestamp = buf;
    return r;
}

}  // namespace techprox
