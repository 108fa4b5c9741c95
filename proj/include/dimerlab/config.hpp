#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dimerlab {

/// Flat, typed, text-based configuration with sections.  Keys are
/// "section.name"; the file format is INI-like:
///
///     [experiment]
///     kind = velocity
///     seed = 42
///
/// Values are stored as strings and converted on access; every key an
/// experiment reads is recorded, so unknown (e.g. misspelled) keys can be
/// rejected rather than silently ignored.
class ExperimentConfig {
  public:
    ExperimentConfig() = default;

    static ExperimentConfig parse(const std::string& text) {
        ExperimentConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": empty section name");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
            if (section.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": key outside any [section]");
            cfg.kv_[section + "." + key] = val;
        }
        return cfg;
    }

    /// Apply a "section.key=value" command-line override.
    void set(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("override must be section.key=value: " + assignment);
        const std::string key = trim(assignment.substr(0, eq));
        if (key.find('.') == std::string::npos)
            throw std::invalid_argument("override key must be section.key: " + assignment);
        kv_[key] = trim(assignment.substr(eq + 1));
    }

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get_string(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw std::invalid_argument("config: missing required key " + key);
        consumed_.insert(key);
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& fallback) const {
        consumed_.insert(key);
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) const {
        consumed_.insert(key);
        return has(key) ? to_double(key, kv_.at(key)) : fallback;
    }

    int64_t get_int(const std::string& key) const { return to_int(key, get_string(key)); }
    int64_t get_int(const std::string& key, int64_t fallback) const {
        consumed_.insert(key);
        return has(key) ? to_int(key, kv_.at(key)) : fallback;
    }

    uint64_t get_seed() const {
        const int64_t s = get_int("experiment.seed");
        if (s < 0) throw std::invalid_argument("config: experiment.seed must be >= 0");
        return static_cast<uint64_t>(s);
    }

    /// Comma-separated list of numbers, e.g. "8, 12, 16".
    std::vector<double> get_list(const std::string& key) const {
        std::vector<double> out;
        std::istringstream in(get_string(key));
        std::string item;
        while (std::getline(in, item, ',')) out.push_back(to_double(key, trim(item)));
        if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
        return out;
    }

    /// Strictly increasing list (ladders of sizes or scales).
    std::vector<double> get_ladder(const std::string& key) const {
        const auto xs = get_list(key);
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (xs[i] <= xs[i - 1])
                throw std::invalid_argument("config: " + key + " must be strictly increasing");
        return xs;
    }

    /// Throws listing every key that no reader consumed (typo protection).
    void reject_unknown_keys() const {
        std::string unknown;
        for (const auto& [k, v] : kv_)
            if (!consumed_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
        if (!unknown.empty()) throw std::invalid_argument("config: unknown keys: " + unknown);
    }

    /// Canonical text form; parse(echo()) compares equal to *this.
    std::string echo() const {
        std::map<std::string, std::map<std::string, std::string>> by_section;
        for (const auto& [k, v] : kv_) {
            const auto dot = k.find('.');
            by_section[k.substr(0, dot)][k.substr(dot + 1)] = v;
        }
        std::string out;
        for (const auto& [sec, entries] : by_section) {
            out += "[" + sec + "]\n";
            for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
        }
        return out;
    }

    bool operator==(const ExperimentConfig& other) const { return kv_ == other.kv_; }

  private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }
    static double to_double(const std::string& key, const std::string& v) {
        std::size_t pos = 0;
        double x = 0;
        try {
            x = std::stod(v, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: " + key + " is not a number: " + v);
        }
        if (pos != v.size())
            throw std::invalid_argument("config: " + key + " is not a number: " + v);
        return x;
    }
    static int64_t to_int(const std::string& key, const std::string& v) {
        std::size_t pos = 0;
        int64_t x = 0;
        try {
            x = std::stoll(v, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: " + key + " is not an integer: " + v);
        }
        if (pos != v.size())
            throw std::invalid_argument("config: " + key + " is not an integer: " + v);
        return x;
    }

    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> consumed_;
};

} // namespace dimerlab
