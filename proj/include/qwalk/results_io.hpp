#pragma once

// Result-file writing shared by the command line tool: distribution tables as
// CSV or JSON, generic two-column series, and the run manifest that makes
// every invocation reproducible byte for byte.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qwalk/walk.hpp"

namespace qwalk {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", p);
    return buf;
}

// CSV rows `step,x,coin,probability`, positions ascending, H before V,
// probabilities printed with 12 significant digits.
inline void write_distribution_csv(std::ostream& os, const ModeDistribution& dist) {
    os << "step,x,coin,probability\n";
    for (const auto& [mode, p] : dist.entries)
        os << dist.step << ',' << mode.x << ',' << coin_char(mode.c) << ','
           << format_probability(p) << '\n';
}

inline ModeDistribution read_distribution_csv(std::istream& is) {
    ModeDistribution dist;
    std::string line;
    if (!std::getline(is, line) || line != "step,x,coin,probability")
        throw std::invalid_argument("distribution CSV: unexpected header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::getline(row, field, ',');
        dist.step = std::stoi(field);
        std::getline(row, field, ',');
        const int x = std::stoi(field);
        std::getline(row, field, ',');
        const Coin c = field == "H" ? Coin::H : Coin::V;
        std::getline(row, field, ',');
        dist.entries[Mode{x, c}] = std::stod(field);
    }
    return dist;
}

inline nlohmann::json distribution_to_json(const ModeDistribution& dist) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [mode, p] : dist.entries)
        rows.push_back({{"step", dist.step},
                        {"x", mode.x},
                        {"coin", std::string(1, coin_char(mode.c))},
                        {"probability", p}});
    return rows;
}

// Two-column series (variance curves, recurrence curves, ...).
inline void write_series_csv(std::ostream& os, const std::string& key_header,
                             const std::string& value_header,
                             const std::vector<std::pair<int, double>>& rows) {
    os << key_header << ',' << value_header << '\n';
    for (const auto& [k, v] : rows) os << k << ',' << format_probability(v) << '\n';
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string checksum_hex(const std::string& bytes) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

// Record of one tool invocation: command, full parameter set, seed, version
// and the checksums of everything written. Re-running the same manifest
// reproduces the result files byte for byte.
struct RunManifest {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    std::uint64_t rng_seed = 0;
    std::vector<std::pair<std::string, std::string>> outputs;  // path, checksum

    nlohmann::json to_json() const {
        nlohmann::json out;
        out["command"] = command;
        out["parameters"] = parameters;
        out["rng_seed"] = rng_seed;
        out["tool_version"] = kToolVersion;
        nlohmann::json files = nlohmann::json::array();
        for (const auto& [path, sum] : outputs)
            files.push_back({{"path", path}, {"checksum", sum}});
        out["outputs"] = files;
        return out;
    }
};

inline void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << contents;
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace qwalk
