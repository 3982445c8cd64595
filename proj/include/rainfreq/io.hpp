#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/rng.hpp"
#include "rainfreq/version.hpp"

namespace rainfreq {

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << v;
    return ss.str();
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file for digest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return hex64(fnv1a64(buf.str()));
}

/// Metadata block stamped at the top of every output file: config hash,
/// seed, code version, and input digests, as '#' comment lines.
struct Metadata {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> input_digests; // (name, digest)
    std::string created; ///< RFC3339 UTC; normalized away in byte comparisons

    static std::string now_utc() {
        const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::ostringstream ss;
        ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        return ss.str();
    }

    std::string render() const {
        std::ostringstream ss;
        ss << "# rainfreq " << RAINFREQ_VERSION << "\n";
        ss << "# created: " << (created.empty() ? now_utc() : created) << "\n";
        ss << "# seed: " << seed << "\n";
        ss << "# rng: " << kRngName << "\n";
        ss << "# config_hash: " << config_hash << "\n";
        for (const auto& [name, digest] : input_digests)
            ss << "# input " << name << ": " << digest << "\n";
        return ss.str();
    }
};

/// Write-once semantics: contents land in a temp file in the target
/// directory, then rename into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const auto dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    std::filesystem::create_directories(dir);
    const auto tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw input_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw input_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_with_metadata(const std::filesystem::path& path, const Metadata& meta,
                                const std::string& body) {
    atomic_write(path, meta.render() + body);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace rainfreq
