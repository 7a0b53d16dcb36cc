#pragma once

// Grid runs over delta x k_min x seed. Each cell starts from fresh state. The
// reference accuracy for a seed comes from one full_majority run on the same
// ordering.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "camvo/config_io.hpp"
#include "camvo/engine.hpp"
#include "camvo/report.hpp"

namespace camvo {

struct SweepRow {
    double delta = 0.0;
    std::size_t k_min = 0;
    std::uint64_t seed = 0;
    double majority_accuracy = 0.0;
    double target_accuracy = 0.0;  // delta * majority_accuracy
    double accuracy = 0.0;
    double cost = 0.0;  // currency per million tokens
    double mean_cost = 0.0;
    std::size_t fallback_count = 0;
};

struct SweepOptions {
    RunOptions run;
    std::optional<std::filesystem::path> log_dir;  // per-cell logs when set
    std::function<void(const SweepRow&)> on_row;
};

inline std::string cell_name(double delta, std::size_t k_min, std::uint64_t seed) {
    return "cell_delta" + format_real(delta) + "_k" + std::to_string(k_min) + "_s" + std::to_string(seed);
}

inline std::vector<SweepRow> sweep(const Dataset& dataset, const SweepGrid& grid, const SweepOptions& opts = {}) {
    if (!dataset.has_true_labels()) throw Error("sweep needs true labels on every instance");
    std::vector<SweepRow> rows;
    for (const auto seed : grid.seeds) {
        PolicyConfig majority = grid.base;
        majority.mode = Mode::full_majority;
        majority.seed = seed;
        majority.k_min = 1;
        const double maj_acc = *run(dataset, majority, opts.run).summary.accuracy;
        for (const auto delta : grid.deltas) {
            for (const auto k_min : grid.k_mins) {
                PolicyConfig cfg = grid.base;
                cfg.delta = delta;
                cfg.k_min = k_min;
                cfg.seed = seed;
                const RunResult r = run(dataset, cfg, opts.run);
                if (opts.log_dir) {
                    std::filesystem::create_directories(*opts.log_dir);
                    std::ofstream log(*opts.log_dir / (cell_name(delta, k_min, seed) + ".csv"));
                    write_round_log(log, r.rounds);
                }
                SweepRow row{delta, k_min, seed, maj_acc, delta * maj_acc, *r.summary.accuracy,
                             r.summary.cost_per_million_tokens, r.summary.mean_cost, r.summary.fallback_count};
                if (opts.on_row) opts.on_row(row);
                rows.push_back(row);
            }
        }
    }
    return rows;
}

inline void write_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "delta,k_min,seed,target_acc,acc,cost,maj_acc,mean_cost,fallback_count\n";
    for (const auto& r : rows)
        out << format_real(r.delta) << ',' << r.k_min << ',' << r.seed << ',' << format_real(r.target_accuracy)
            << ',' << format_real(r.accuracy) << ',' << format_real(r.cost) << ','
            << format_real(r.majority_accuracy) << ',' << format_real(r.mean_cost) << ',' << r.fallback_count
            << '\n';
    if (!out) throw Error("sweep table write failed");
}

}  // namespace camvo
