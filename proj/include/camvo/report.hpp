#pragma once

// Per-round CSV logs and summary JSON.
//
//   t,subset_bitmask,cost,predicted,true,reward_bits,cum_cost,cum_acc
//
// reward_bits is a bitmask over arm ids (bit i set when arm i was queried and
// agreed with the prediction). Empty "true"/"cum_acc" fields mean no label.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "camvo/core.hpp"
#include "camvo/engine.hpp"
#include "camvo/metrics.hpp"
#include "camvo/serialize.hpp"

namespace camvo {

inline constexpr const char* kLogHeader = "t,subset_bitmask,cost,predicted,true,reward_bits,cum_cost,cum_acc";

inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline ArmMask reward_mask(const RoundRecord& r) {
    ArmMask m = 0;
    for (std::size_t k = 0; k < r.decision.arms.size(); ++k)
        if (r.rewards[k] != 0) m |= ArmMask{1} << r.decision.arms[k];
    return m;
}

inline void write_round_log(std::ostream& out, const std::vector<RoundRecord>& rounds) {
    out << kLogHeader << '\n';
    for (const auto& r : rounds) {
        out << r.t << ',' << r.decision.mask() << ',' << format_real(r.decision.cost) << ',' << r.predicted
            << ',';
        if (r.true_label) out << *r.true_label;
        out << ',' << reward_mask(r) << ',' << format_real(r.cumulative_cost) << ',';
        if (r.cumulative_accuracy) out << format_real(*r.cumulative_accuracy);
        out << '\n';
    }
    if (!out) throw Error("log write failed");
}

/// One parsed log line.
struct LogRow {
    std::size_t t = 0;
    ArmMask subset = 0;
    double cost = 0.0;
    Label predicted = 0;
    std::optional<Label> true_label;
    ArmMask rewards = 0;
    double cumulative_cost = 0.0;
    std::optional<double> cumulative_accuracy;
};

inline std::vector<LogRow> read_round_log(std::istream& in, const std::string& source = "<log>") {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw Error(source + ": empty log");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kLogHeader) throw Error(source + ":1: unexpected log header");
    std::vector<LogRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 8) throw Error(source + ":" + std::to_string(line_no) + ": expected 8 fields");
        try {
            LogRow r;
            r.t = std::stoull(f[0]);
            r.subset = static_cast<ArmMask>(std::stoul(f[1]));
            r.cost = std::stod(f[2]);
            r.predicted = std::stoi(f[3]);
            if (!f[4].empty()) r.true_label = std::stoi(f[4]);
            r.rewards = static_cast<ArmMask>(std::stoul(f[5]));
            r.cumulative_cost = std::stod(f[6]);
            if (!f[7].empty()) r.cumulative_accuracy = std::stod(f[7]);
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw Error(source + ":" + std::to_string(line_no) + ": malformed field");
        }
    }
    return rows;
}

inline Json summary_to_json(const RunSummary& s) {
    Json j{{"mode", std::string(to_string(s.config.mode))},
           {"config", s.config},
           {"total_rounds", s.total_rounds},
           {"total_cost", s.total_cost},
           {"mean_cost", s.mean_cost},
           {"cost_per_million_tokens", s.cost_per_million_tokens},
           {"accuracy", detail::optional_to_json(s.accuracy)},
           {"fallback_count", s.fallback_count},
           {"token_fallback", s.token_fallback},
           {"log_path", s.log_path}};
    if (s.accuracy) {
        Json labels = Json::array();
        for (const auto& l : s.per_label)
            labels.push_back(Json{{"label", l.label},
                                  {"precision", l.precision},
                                  {"recall", l.recall},
                                  {"f1", l.f1},
                                  {"undefined", l.undefined}});
        j["per_label"] = labels;
    } else {
        j["per_label"] = nullptr;
    }
    return j;
}

/// Metrics recomputed from a log. Rows without a true label are skipped.
inline Json metrics_from_log(const std::vector<LogRow>& rows, std::size_t label_count) {
    std::vector<Label> predicted;
    std::vector<Label> truth;
    double total = 0.0;
    for (const auto& r : rows) {
        total += r.cost;
        if (r.true_label) {
            predicted.push_back(r.predicted);
            truth.push_back(*r.true_label);
        }
    }
    Json j{{"total_rounds", rows.size()}, {"total_cost", total}};
    j["mean_cost"] = rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
    if (!truth.empty() && truth.size() == rows.size()) {
        const Metrics m = compute_metrics(predicted, truth, label_count);
        j["accuracy"] = m.accuracy;
        Json labels = Json::array();
        for (const auto& l : m.per_label)
            labels.push_back(Json{{"label", l.label},
                                  {"precision", l.precision},
                                  {"recall", l.recall},
                                  {"f1", l.f1},
                                  {"undefined", l.undefined}});
        j["per_label"] = labels;
    } else {
        j["accuracy"] = nullptr;
        j["per_label"] = nullptr;
    }
    return j;
}

}  // namespace camvo
