#pragma once

// Plain key = value config files. '#' starts a comment; list values are
// comma separated.
//
//   dataset = data/mmlu.jsonl
//   mode = camvo
//   delta = 0.9
//   deltas = 0.9, 0.8      # sweep grids only

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "camvo/core.hpp"

namespace camvo {

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    T v{};
    in >> v;
    if (in.fail() || !(in >> std::ws).eof())
        throw Error("config key '" + key + "': cannot parse '" + text + "'");
    return v;
}

}  // namespace detail

inline KeyValues parse_key_values(std::istream& in, const std::string& source = "<config>") {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(source + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw Error(source + ":" + std::to_string(line_no) + ": empty key");
        if (kv.count(key)) throw Error(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv[key] = detail::trim(line.substr(eq + 1));
    }
    return kv;
}

inline KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    return parse_key_values(in, path);
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (!item.empty()) out.push_back(detail::parse_value<T>(key, item));
    }
    if (out.empty()) throw Error("config key '" + key + "': empty list");
    return out;
}

/// Sets one PolicyConfig field. Returns false for keys that are not policy fields.
inline bool apply_policy_key(PolicyConfig& c, const std::string& key, const std::string& value) {
    using detail::parse_value;
    if (key == "delta") c.delta = parse_value<double>(key, value);
    else if (key == "k_min") c.k_min = parse_value<std::size_t>(key, value);
    else if (key == "alpha_explore") c.alpha_explore = parse_value<double>(key, value);
    else if (key == "lambda_L") c.lambda_L = parse_value<double>(key, value);
    else if (key == "lambda_R") c.lambda_R = parse_value<double>(key, value);
    else if (key == "mode") c.mode = parse_mode(value);
    else if (key == "confidence_method") c.confidence_method = parse_confidence_method(value);
    else if (key == "mc_samples") c.mc_samples = parse_value<std::size_t>(key, value);
    else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, value);
    else if (key == "epsilon") c.epsilon = parse_value<double>(key, value);
    else return false;
    return true;
}

struct RunFile {
    PolicyConfig config;
    std::optional<std::string> dataset;
};

inline RunFile run_file_from(const KeyValues& kv) {
    RunFile f;
    for (const auto& [key, value] : kv) {
        if (key == "dataset") f.dataset = value;
        else if (!apply_policy_key(f.config, key, value)) throw Error("unknown config key '" + key + "'");
    }
    return f;
}

struct SweepGrid {
    PolicyConfig base;
    std::optional<std::string> dataset;
    std::vector<double> deltas;
    std::vector<std::size_t> k_mins;
    std::vector<std::uint64_t> seeds;
};

inline SweepGrid sweep_grid_from(const KeyValues& kv) {
    SweepGrid g;
    for (const auto& [key, value] : kv) {
        if (key == "dataset") g.dataset = value;
        else if (key == "deltas") g.deltas = parse_list<double>(key, value);
        else if (key == "k_mins") g.k_mins = parse_list<std::size_t>(key, value);
        else if (key == "seeds") g.seeds = parse_list<std::uint64_t>(key, value);
        else if (!apply_policy_key(g.base, key, value)) throw Error("unknown grid key '" + key + "'");
    }
    if (g.deltas.empty()) g.deltas = {g.base.delta};
    if (g.k_mins.empty()) g.k_mins = {g.base.k_min};
    if (g.seeds.empty()) g.seeds = {g.base.seed};
    return g;
}

}  // namespace camvo
