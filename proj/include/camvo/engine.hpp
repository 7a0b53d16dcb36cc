#pragma once

// The online labeling loop for every mode: cost-aware subset voting (independent
// or correlated confidence), the query-everything baseline, and full weighted
// majority with the learned weights.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camvo/confidence.hpp"
#include "camvo/core.hpp"
#include "camvo/correlation.hpp"
#include "camvo/dataset.hpp"
#include "camvo/metrics.hpp"
#include "camvo/oracle.hpp"
#include "camvo/rng.hpp"
#include "camvo/vote.hpp"

namespace camvo {

inline constexpr double kInverseTolerance = 1e-8;

struct RunOptions {
    bool shuffle = true;
    bool check_invariants = false;  // verify A_inv * A = I after every round
};

struct RunSummary {
    PolicyConfig config;
    std::size_t total_rounds = 0;
    double total_cost = 0.0;
    double mean_cost = 0.0;               // currency per instance
    double cost_per_million_tokens = 0.0;  // total cost over mean tokens per instance, x 1e6
    std::optional<double> accuracy;
    std::vector<LabelMetrics> per_label;
    std::size_t fallback_count = 0;
    bool token_fallback = false;
    std::string log_path;
};

struct RunResult {
    RunSummary summary;
    std::vector<RoundRecord> rounds;
};

/// Per-run state machine. One call to step() is one round.
class LabelingEngine {
  public:
    LabelingEngine(const DatasetHeader& header, const PolicyConfig& config)
        : header_(header),
          config_(config),
          ctx_(validate_run_config(config, header.arms, header)),
          baseline_(header.arm_count),
          correlation_(header.arm_count) {
        arms_.reserve(ctx_.arm_count);
        for (std::size_t i = 0; i < ctx_.arm_count; ++i)
            arms_.push_back(ArmState::fresh(ctx_.dim, config.lambda_L));
        rho_.resize(ctx_.arm_count);
        for (const auto& a : header.arms) rho_[a.arm_id] = a.cost_per_token;
    }

    const RunContext& context() const { return ctx_; }
    const std::vector<ArmState>& arms() const { return arms_; }
    const CorrelationState& correlation() const { return correlation_; }
    const BaselineVoter& baseline() const { return baseline_; }

    /// Confidence records for every arm at round t (1-based) without mutating state.
    std::vector<ConfidenceRecord> confidences(const Instance& inst, std::size_t t) const {
        std::vector<ConfidenceRecord> recs;
        recs.reserve(arms_.size());
        for (const auto& arm : arms_) recs.push_back(compute_confidence(arm, inst.embedding, config_, t));
        return recs;
    }

    SubsetQuery make_query(const Instance& inst, std::span<const ConfidenceRecord> recs,
                           std::size_t t) const {
        SubsetQuery q;
        const std::size_t K = ctx_.arm_count;
        q.L.resize(K);
        q.omega.resize(K);
        q.costs.resize(K);
        for (std::size_t i = 0; i < K; ++i) {
            q.L[i] = recs[i].L;
            q.omega[i] = recs[i].omega;
            q.costs[i] = rho_[i] * static_cast<double>(inst.token_counts[i]);
        }
        q.delta = config_.delta;
        q.k_min = config_.k_min;
        q.method = config_.confidence_method;
        q.mc_samples = config_.mc_samples;
        q.mc_seed = derive_seed(config_.seed, t, StreamPurpose::monte_carlo);
        if (config_.mode == Mode::ccamvo) {
            q.correlation = correlation_.correlation();
            // marginals are the smoothed per-arm lower bounds, kept inside (0,1)
            std::vector<double> marginals(K);
            for (std::size_t i = 0; i < K; ++i)
                marginals[i] = std::clamp(q.L[i], config_.epsilon, 1.0 - config_.epsilon);
            q.mu = std::move(marginals);
        }
        return q;
    }

    RoundRecord step(const Instance& inst, std::size_t t) {
        validate_instance(ctx_, inst);
        for (const auto& v : inst.cached_labels)
            if (!v) throw Error("instance '" + inst.instance_id + "' lacks a cached vote");
        if (inst.cached_labels.size() != ctx_.arm_count)
            throw Error("instance '" + inst.instance_id + "' lacks cached votes");
        return config_.mode == Mode::baseline ? step_baseline(inst, t) : step_camvo(inst, t);
    }

  private:
    RoundRecord step_baseline(const Instance& inst, std::size_t t) {
        RoundRecord rec;
        rec.t = t;
        const std::size_t K = ctx_.arm_count;
        rec.decision.arms = mask_to_arms(full_mask(K));
        for (std::size_t i = 0; i < K; ++i) {
            rec.decision.cost += rho_[i] * static_cast<double>(inst.token_counts[i]);
            rec.votes.push_back(*inst.cached_labels[i]);
        }
        rec.predicted = baseline_.step(rec.votes, ctx_.label_count).predicted;
        rec.rewards = rewards_from_vote(rec.votes, rec.predicted);
        rec.true_label = inst.true_label;
        return rec;
    }

    RoundRecord step_camvo(const Instance& inst, std::size_t t) {
        const std::size_t K = ctx_.arm_count;
        const std::vector<ConfidenceRecord> recs = confidences(inst, t);
        const SubsetQuery query = make_query(inst, recs, t);

        RoundRecord rec;
        rec.t = t;
        if (config_.mode == Mode::full_majority) {
            const ArmMask all = full_mask(K);
            rec.decision = {mask_to_arms(all), subset_confidence(query, all),
                            subset_cost(query.costs, all), false};
        } else {
            rec.decision = find_min_cost_subset(query);
        }

        std::vector<double> weights;
        for (auto a : rec.decision.arms) {
            rec.votes.push_back(*inst.cached_labels[a]);
            weights.push_back(recs[a].omega);
        }
        rec.predicted = weighted_majority(rec.votes, weights, ctx_.label_count);
        rec.rewards = rewards_from_vote(rec.votes, rec.predicted);
        rec.true_label = inst.true_label;

        // a lone voter always agrees with itself, so it carries no learning signal
        if (rec.decision.arms.size() > 1) {
            std::vector<int> reward_by_arm(K, 0);
            for (std::size_t k = 0; k < rec.decision.arms.size(); ++k) {
                const auto a = rec.decision.arms[k];
                const int r = rec.rewards[k];
                reward_by_arm[a] = r;
                ArmState& arm = arms_[a];
                arm.add_observation(inst.embedding, static_cast<double>(r));
                ++arm.queries;
                arm.correct_count += r;
                update_beta_params(arm, recs[a].q, r, config_.epsilon);
            }
            if (config_.mode == Mode::ccamvo) correlation_.update(reward_by_arm, rec.decision.arms);
        }
        return rec;
    }

    DatasetHeader header_;
    PolicyConfig config_;
    RunContext ctx_;
    std::vector<ArmState> arms_;
    std::vector<double> rho_;
    BaselineVoter baseline_;
    CorrelationState correlation_;
};

inline RunResult run(const Dataset& dataset, const PolicyConfig& config, const RunOptions& opts = {}) {
    LabelingEngine engine(dataset.header, config);
    const std::vector<Instance> order =
        opts.shuffle ? shuffle(dataset.instances, config.seed) : dataset.instances;

    RunResult result;
    RunSummary& summary = result.summary;
    summary.config = config;
    summary.token_fallback = dataset.token_fallback;
    result.rounds.reserve(order.size());

    double cumulative = 0.0;
    double token_mass = 0.0;
    std::size_t correct = 0;
    std::size_t labelled = 0;
    std::vector<Label> predicted;
    std::vector<Label> truth;
    const bool all_labelled = dataset.has_true_labels();
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Instance& inst = order[k];
        RoundRecord rec = engine.step(inst, k + 1);
        cumulative += rec.decision.cost;
        rec.cumulative_cost = cumulative;
        if (rec.true_label) {
            ++labelled;
            if (rec.predicted == *rec.true_label) ++correct;
            rec.cumulative_accuracy = static_cast<double>(correct) / static_cast<double>(labelled);
            predicted.push_back(rec.predicted);
            truth.push_back(*rec.true_label);
        }
        if (rec.decision.fell_back_to_all) ++summary.fallback_count;
        double tokens = 0.0;
        for (auto h : inst.token_counts) tokens += static_cast<double>(h);
        token_mass += tokens / static_cast<double>(inst.token_counts.size());
        if (opts.check_invariants)
            for (const auto& arm : engine.arms())
                if (arm.inverse_residual() > kInverseTolerance)
                    throw Error("A_inv drifted from the inverse of A at round " + std::to_string(k + 1));
        result.rounds.push_back(std::move(rec));
    }
    summary.total_rounds = order.size();
    summary.total_cost = cumulative;
    summary.mean_cost = order.empty() ? 0.0 : cumulative / static_cast<double>(order.size());
    summary.cost_per_million_tokens = token_mass > 0.0 ? cumulative / token_mass * 1e6 : 0.0;
    if (all_labelled) {
        const Metrics m = compute_metrics(predicted, truth, dataset.header.label_count);
        summary.accuracy = m.accuracy;
        summary.per_label = m.per_label;
    }
    return result;
}

}  // namespace camvo
