#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace dimerlab {

inline constexpr const char* kCodeVersion = "dimerlab 0.1.0";

/// FNV-1a 64-bit checksum of a byte string (stable, dependency-free).
inline uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Minimal long-format CSV builder (plot-ready: one row per observation).
struct CsvBuilder {
    std::string text;

    explicit CsvBuilder(const std::vector<std::string>& header) { row_strings(header); }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            text += (i ? "," : "") + cells[i];
        text += "\n";
    }
    void row(const std::vector<double>& cells) {
        char buf[40];
        for (std::size_t i = 0; i < cells.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", cells[i]);
            text += (i ? "," : "") + std::string(buf);
        }
        text += "\n";
    }
};

struct OutputRecord {
    std::string name;      ///< file name relative to the run directory
    uint64_t checksum = 0; ///< FNV-1a of the file bytes
    bool censored = false; ///< run hit a resource cap; output is partial
};

/// Record of one experiment run: config echo, code version, wall-clock
/// bracket, every emitted file with its checksum, and accumulated warnings.
/// Written (atomically, last) as manifest.json in the run directory.
struct RunManifest {
    std::string config_echo;
    std::string code_version = kCodeVersion;
    std::string started_at, finished_at;
    std::vector<OutputRecord> outputs;
    std::vector<std::string> warnings;

    bool censored() const {
        for (const auto& o : outputs)
            if (o.censored) return true;
        return false;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config"] = config_echo;
        j["code_version"] = code_version;
        j["started_at"] = started_at;
        j["finished_at"] = finished_at;
        j["warnings"] = warnings;
        j["outputs"] = nlohmann::json::array();
        for (const auto& o : outputs)
            j["outputs"].push_back(
                {{"name", o.name}, {"fnv1a", o.checksum}, {"censored", o.censored}});
        return j;
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.config_echo = j.at("config").get<std::string>();
        m.code_version = j.at("code_version").get<std::string>();
        m.started_at = j.at("started_at").get<std::string>();
        m.finished_at = j.at("finished_at").get<std::string>();
        for (const auto& w : j.at("warnings")) m.warnings.push_back(w.get<std::string>());
        for (const auto& o : j.at("outputs"))
            m.outputs.push_back({o.at("name").get<std::string>(), o.at("fnv1a").get<uint64_t>(),
                                 o.at("censored").get<bool>()});
        return m;
    }
};

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

} // namespace dimerlab
