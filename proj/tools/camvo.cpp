// camvo: run, sweep, synthesize, and re-score cost-aware majority voting runs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "camvo/config_io.hpp"
#include "camvo/dataset.hpp"
#include "camvo/engine.hpp"
#include "camvo/report.hpp"
#include "camvo/sweep.hpp"
#include "camvo/synthgen.hpp"

namespace fs = std::filesystem;
using namespace camvo;

namespace {

// Flag values left unset fall back to the config file, then to defaults.
struct PolicyFlags {
    std::optional<double> delta, alpha_explore, lambda_L, lambda_R, epsilon;
    std::optional<std::size_t> k_min, mc_samples;
    std::optional<std::string> mode, confidence_method;

    void attach(CLI::App* app) {
        app->add_option("--delta", delta, "Target subset confidence");
        app->add_option("--k_min", k_min, "Minimum subset size");
        app->add_option("--alpha_explore", alpha_explore, "LinUCB exploration weight");
        app->add_option("--lambda_L", lambda_L, "Ridge regularizer");
        app->add_option("--lambda_R", lambda_R, "Smoothing strength");
        app->add_option("--epsilon", epsilon, "Numerical floor");
        app->add_option("--mc_samples", mc_samples, "Monte Carlo draws per subset");
        app->add_option("--mode", mode, "camvo | ccamvo | baseline | full_majority");
        app->add_option("--confidence_method", confidence_method, "exact | beta_cdf | monte_carlo");
    }

    void apply(PolicyConfig& c) const {
        if (delta) c.delta = *delta;
        if (k_min) c.k_min = *k_min;
        if (alpha_explore) c.alpha_explore = *alpha_explore;
        if (lambda_L) c.lambda_L = *lambda_L;
        if (lambda_R) c.lambda_R = *lambda_R;
        if (epsilon) c.epsilon = *epsilon;
        if (mc_samples) c.mc_samples = *mc_samples;
        if (mode) c.mode = parse_mode(*mode);
        if (confidence_method) c.confidence_method = parse_confidence_method(*confidence_method);
        // correlated mode only makes sense with sampled confidence
        if (c.mode == Mode::ccamvo && !confidence_method) c.confidence_method = ConfidenceMethod::monte_carlo;
    }
};

std::string resolve_dataset(const std::optional<std::string>& flag, const std::optional<std::string>& file) {
    if (flag) return *flag;
    if (file) return *file;
    throw Error("no dataset given (use --dataset or a 'dataset' config key)");
}

void write_json(const fs::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cost-aware majority voting over a pool of annotators"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Label a dataset with one mode and config");
    std::optional<std::string> run_config, run_dataset;
    std::uint64_t run_seed = 0;
    std::string run_out;
    bool run_no_shuffle = false;
    PolicyFlags run_flags;
    run_cmd->add_option("--config", run_config, "key = value config file")->check(CLI::ExistingFile);
    run_cmd->add_option("--dataset", run_dataset, "Dataset file")->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", run_seed, "Run seed")->required();
    run_cmd->add_option("--out-dir", run_out, "Output directory")->required();
    run_cmd->add_flag("--no-shuffle", run_no_shuffle, "Keep file order");
    run_flags.attach(run_cmd);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a delta x k_min x seed grid");
    std::string grid_path;
    std::optional<std::string> sweep_dataset;
    std::vector<std::uint64_t> sweep_seeds;
    std::string sweep_out;
    bool sweep_logs = false;
    PolicyFlags sweep_flags;
    sweep_cmd->add_option("grid", grid_path, "Grid file")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--dataset", sweep_dataset, "Dataset file")->check(CLI::ExistingFile);
    sweep_cmd->add_option("--seed", sweep_seeds, "Seeds (override the grid)")->required();
    sweep_cmd->add_option("--out-dir", sweep_out, "Output directory")->required();
    sweep_cmd->add_flag("--logs", sweep_logs, "Write a round log per cell");
    sweep_flags.attach(sweep_cmd);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic replay dataset");
    std::string synth_out;
    std::string preset = "mmlu";
    std::size_t rounds = 14000, dim = 5, labels = 4;
    double gamma = 0.3, sigma = 0.5, alpha_ctx = 0.1;
    std::uint64_t synth_seed = 0;
    bool standardize = true, no_bias = false;
    synth_cmd->add_option("--out", synth_out, "Dataset file to write")->required();
    synth_cmd->add_option("--preset", preset, "Arm preset")->check(CLI::IsMember({"mmlu"}));
    synth_cmd->add_option("--rounds", rounds, "Number of instances");
    synth_cmd->add_option("--dim", dim, "Context dimension");
    synth_cmd->add_option("--labels", labels, "Label alphabet size");
    synth_cmd->add_option("--gamma", gamma, "Uniform off-diagonal correctness correlation");
    synth_cmd->add_option("--sigma", sigma, "Latent noise scale");
    synth_cmd->add_option("--alpha_ctx", alpha_ctx, "Shared context weight");
    synth_cmd->add_option("--seed", synth_seed, "Generator seed");
    synth_cmd->add_option("--standardize", standardize, "Standardize the latent score (true/false)");
    synth_cmd->add_flag("--no-bias", no_bias, "Omit the constant embedding feature");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Recompute metrics from a round log");
    std::string log_path;
    std::size_t metric_labels = 0;
    metrics_cmd->add_option("log", log_path, "Round log CSV")->required()->check(CLI::ExistingFile);
    metrics_cmd->add_option("--labels", metric_labels, "Label alphabet size M")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            RunFile file;
            if (run_config) file = run_file_from(read_key_values(*run_config));
            PolicyConfig cfg = file.config;
            run_flags.apply(cfg);
            cfg.seed = run_seed;
            const Dataset ds = load_dataset(resolve_dataset(run_dataset, file.dataset));
            RunOptions opts;
            opts.shuffle = !run_no_shuffle;
            RunResult r = run(ds, cfg, opts);
            fs::create_directories(run_out);
            const fs::path log = fs::path(run_out) / "rounds.csv";
            std::ofstream out(log);
            write_round_log(out, r.rounds);
            r.summary.log_path = log.string();
            write_json(fs::path(run_out) / "summary.json", summary_to_json(r.summary));
            std::cout << "rounds " << r.summary.total_rounds << "  cost/Mtok "
                      << format_real(r.summary.cost_per_million_tokens);
            if (r.summary.accuracy) std::cout << "  accuracy " << format_real(*r.summary.accuracy);
            std::cout << "  fallbacks " << r.summary.fallback_count << '\n';
        } else if (*sweep_cmd) {
            SweepGrid grid = sweep_grid_from(read_key_values(grid_path));
            sweep_flags.apply(grid.base);
            grid.seeds = sweep_seeds;
            const Dataset ds = load_dataset(resolve_dataset(sweep_dataset, grid.dataset));
            SweepOptions opts;
            if (sweep_logs) opts.log_dir = fs::path(sweep_out) / "logs";
            opts.on_row = [](const SweepRow& row) {
                std::cerr << "delta " << row.delta << " k_min " << row.k_min << " seed " << row.seed
                          << ": acc " << row.accuracy << " target " << row.target_accuracy << '\n';
            };
            const auto rows = sweep(ds, grid, opts);
            fs::create_directories(sweep_out);
            std::ofstream out(fs::path(sweep_out) / "sweep.csv");
            write_sweep_table(out, rows);
            write_sweep_table(std::cout, rows);
        } else if (*synth_cmd) {
            SyntheticConfig cfg = mmlu_preset();
            cfg.rounds = rounds;
            cfg.dim = dim;
            cfg.sigma = sigma;
            cfg.alpha_ctx = alpha_ctx;
            cfg.seed = synth_seed;
            cfg.standardize_latent = standardize;
            cfg.C_target = uniform_correlation(cfg.arm_count, gamma);
            EmitOptions emit;
            emit.label_count = labels;
            emit.bias_feature = !no_bias;
            std::ofstream out(synth_out);
            if (!out) throw Error("cannot write '" + synth_out + "'");
            emit_replayable(cfg, out, emit);
        } else if (*metrics_cmd) {
            std::ifstream in(log_path);
            const auto rows = read_round_log(in, log_path);
            std::cout << metrics_from_log(rows, metric_labels).dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
