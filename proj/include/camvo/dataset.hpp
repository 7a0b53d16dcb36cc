#pragma once

// Replay dataset files: one JSON object per line, a header line first.
//
//   {"d": 384, "K": 7, "M": 4, "arms": [{"name": "a", "rho": 5e-08}, ...], "labels": [...]}
//   {"id": "x1", "embedding": [...], "tokens": [...], "votes": [...], "label": 2}
//
// "label" is optional. "tokens" may be omitted when a "text" field is present, in
// which case every arm is charged ceil(code_points / 4) tokens.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "camvo/core.hpp"
#include "camvo/rng.hpp"
#include "camvo/serialize.hpp"

namespace camvo {

struct Dataset {
    DatasetHeader header;
    std::vector<Instance> instances;
    bool token_fallback = false;  // some token counts were estimated from text length

    bool has_true_labels() const {
        if (instances.empty()) return false;
        for (const auto& inst : instances)
            if (!inst.true_label) return false;
        return true;
    }
};

inline std::size_t utf8_code_points(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

inline Dataset load_dataset(std::istream& in, const std::string& source = "<stream>") {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    RunContext ctx;
    auto fail = [&](const std::string& what) -> Error {
        return Error(source + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw fail(std::string("parse error: ") + e.what());
        }
        if (!have_header) {
            try {
                ds.header = j.get<DatasetHeader>();
            } catch (const Json::exception& e) {
                throw fail(std::string("bad header: ") + e.what());
            }
            if (ds.header.arms.size() != ds.header.arm_count)
                throw fail("header lists " + std::to_string(ds.header.arms.size()) +
                           " arms but K = " + std::to_string(ds.header.arm_count));
            if (ds.header.label_count < 2) throw fail("M must be at least 2");
            if (ds.header.dim == 0) throw fail("d must be positive");
            ctx = RunContext{ds.header.arm_count, ds.header.dim, ds.header.label_count, 0};
            have_header = true;
            continue;
        }
        Instance inst;
        try {
            inst = j.get<Instance>();
        } catch (const Json::exception& e) {
            throw fail(std::string("bad record: ") + e.what());
        }
        if (inst.token_counts.empty()) {
            if (!j.contains("text")) throw fail("instance '" + inst.instance_id + "' has no token counts");
            const auto chars = utf8_code_points(j.at("text").get<std::string>());
            const auto tokens = std::max<std::int64_t>(1, static_cast<std::int64_t>((chars + 3) / 4));
            inst.token_counts.assign(ctx.arm_count, tokens);
            ds.token_fallback = true;
        }
        if (inst.cached_labels.size() < ctx.arm_count)
            inst.cached_labels.resize(ctx.arm_count);
        for (std::size_t a = 0; a < inst.cached_labels.size(); ++a)
            if (!inst.cached_labels[a])
                throw fail("instance '" + inst.instance_id + "' is missing the vote of arm " +
                           std::to_string(a));
        try {
            validate_instance(ctx, inst);
        } catch (const Error& e) {
            throw fail(e.what());
        }
        ds.instances.push_back(std::move(inst));
    }
    if (!have_header) throw Error(source + ": missing header line");
    return ds;
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset '" + path + "'");
    return load_dataset(in, path);
}

inline void write_dataset(std::ostream& out, const Dataset& ds) {
    out << Json(ds.header).dump() << '\n';
    for (const auto& inst : ds.instances) out << Json(inst).dump() << '\n';
    if (!out) throw Error("dataset write failed");
}

/// Fisher-Yates permutation driven by the run seed's shuffle stream.
template <typename T>
std::vector<T> shuffle(std::vector<T> items, std::uint64_t seed) {
    Engine rng = make_engine(derive_seed(seed, 0, StreamPurpose::shuffle));
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
    return items;
}

}  // namespace camvo
