#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace techprox {

/// Bad user-supplied configuration (paths, thresholds, flags).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Remote-fetch failure after retries were exhausted.
class IngestError : public std::runtime_error {
public:
    explicit IngestError(const std::string& msg) : std::runtime_error(msg) {}
};

/// FNV-1a 64-bit. Stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64_mix(std::string_view data, std::uint64_t salt) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((salt >> (8 * i)) & 0xff);
    return fnv1a64(data, fnv1a64(std::string_view(buf, 8)));
}

namespace rng {

/// Uniform double in [0,1) from the engine's full 64-bit output.
/// std::uniform_real_distribution is implementation-defined; this is not.
inline double unit(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Index in [0, n) without modulo bias worth caring about at our scales.
inline std::size_t pick_index(std::mt19937_64& eng, std::size_t n) {
    return static_cast<std::size_t>(unit(eng) * static_cast<double>(n)) % n;
}

/// Index drawn with probability proportional to weights[i]; all-zero
/// weights degrade to uniform.
inline std::size_t pick_weighted(const std::vector<double>& weights, std::mt19937_64& eng) {
    double total = 0;
    for (double w : weights) total += w;
    if (total <= 0) return pick_index(eng, weights.size());
    double target = unit(eng) * total;
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (target < acc) return i;
    }
    return weights.size() - 1;
}

}  // namespace rng

std::string to_lower(std::string_view s);

/// Collapses runs of whitespace to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

/// Shortest round-trip decimal form (to_chars); deterministic across runs.
std::string fmt_double(double v);

/// Fixed-precision form for SVG coordinates.
std::string fmt_fixed(double v, int digits);

double parse_double(std::string_view s, const char* what);
long parse_long(std::string_view s, const char* what);

std::string read_file(const std::filesystem::path& path);

/// Writes via a temp file in the same directory, then renames into place.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::uint64_t hash_file(const std::filesystem::path& path);

/// RAII advisory lock; throws ConfigError if the lock is already held.
class DirLock {
public:
    explicit DirLock(const std::filesystem::path& dir);
    ~DirLock();
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    std::filesystem::path lock_path_;
    bool held_ = false;
};

}  // namespace techprox
