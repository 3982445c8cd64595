// Shared CLI plumbing: the key=value run configuration, bundle layout, and
// output formatting helpers used by every subcommand.
#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rainfreq/csv.hpp"
#include "rainfreq/data.hpp"
#include "rainfreq/errors.hpp"
#include "rainfreq/io.hpp"
#include "rainfreq/models.hpp"
#include "rainfreq/pipeline.hpp"
#include "rainfreq/sampler.hpp"

namespace rainfreq::cli {

/// Key=value run configuration: one config file plus flag overrides.
class RunConfig {
public:
    static RunConfig from_file(const std::string& path) {
        RunConfig cfg;
        const std::string text = read_file(path);
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = csv_detail::trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw input_error(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = csv_detail::trim(t.substr(0, eq));
            const std::string value = csv_detail::trim(t.substr(eq + 1));
            if (key.empty()) throw input_error(path + ": empty key");
            cfg.kv_[key] = value;
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const {
        auto it = kv_.find(key);
        return it != kv_.end() && !it->second.empty();
    }

    std::string require(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end() || it->second.empty())
            throw input_error("config: missing required key '" + key + "'");
        return it->second;
    }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double number(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end() || it->second.empty()) return fallback;
        return parse_double(it->second, "config key " + key);
    }

    int integer(const std::string& key, int fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end() || it->second.empty()) return fallback;
        return parse_int(it->second, "config key " + key);
    }

    std::uint64_t seed() const {
        return static_cast<std::uint64_t>(integer("seed", 0));
    }

    /// Canonical digest over sorted key=value lines; stamped into outputs.
    std::string hash() const {
        std::ostringstream ss;
        for (const auto& [k, v] : kv_) ss << k << '=' << v << '\n';
        return hex64(fnv1a64(ss.str()));
    }

    SamplerConfig sampler() const {
        SamplerConfig s;
        s.chains = integer("chains", 4);
        s.iterations = integer("iterations", 10000);
        s.warmup_fraction = number("warmup_fraction", 0.5);
        s.target_accept = number("target_accept", 0.8);
        s.max_tree_depth = integer("max_tree_depth", 10);
        s.seed = seed();
        s.validate();
        return s;
    }

    const std::map<std::string, std::string>& items() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

inline std::vector<std::string> split_list(const std::string& s) {
    return split_csv_line(s);
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_fixed(double v, int digits = 6) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// ---- fitted-bundle layout --------------------------------------------------
// out/
//   manifest.json      family, seed, inputs, station order, MAP vector
//   draws.csv          draw, chain, log_posterior, <named parameters>
//   diagnostics.csv    parameter, rhat, ess, zero_variance
//   divergences.csv    chain, warmup_divergences, sampling_divergences, step_size
// All CSV files open with the metadata header block.

struct Bundle {
    std::string family;
    std::uint64_t seed = 0;
    int reference_year = 0;
    std::string ams_path;
    std::string covariate_path;
    std::vector<std::string> station_ids;
    PosteriorSamples samples;
    Dataset dataset;
};

Metadata make_metadata(const RunConfig& cfg, const std::vector<std::string>& input_paths);

/// Load the AMS + covariate pair named by the config and assemble a Dataset.
Dataset load_dataset(const std::string& ams_path, const std::string& covariate_path,
                     int reference_year);

void write_bundle(const std::filesystem::path& out, const RunConfig& cfg, const ModelSpec& spec,
                  const Eigen::VectorXd& map_theta, const PosteriorSamples& samples);

Bundle load_bundle(const std::string& dir);

// subcommand entry points; each returns a process exit code
int cmd_ingest(const RunConfig& cfg);
int cmd_fit(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg);
int cmd_validate(const RunConfig& cfg);
int cmd_timeseries(const RunConfig& cfg);
int cmd_compare(const RunConfig& cfg);
int cmd_diagnose(const RunConfig& cfg);

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitNumerical = 4;

} // namespace rainfreq::cli
