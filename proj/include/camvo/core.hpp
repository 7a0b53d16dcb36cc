#pragma once

// Domain types shared by every stage of the labeling engine.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace camvo {

/// Dense label index in [0, M).
using Label = int;

/// Bitmask over arm ids; bit i set means arm i is in the subset.
using ArmMask = std::uint32_t;

inline constexpr std::size_t kMaxArms = 20;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Mode { camvo, ccamvo, baseline, full_majority };
enum class ConfidenceMethod { exact, beta_cdf, monte_carlo };

inline std::string_view to_string(Mode mode);
inline std::string_view to_string(ConfidenceMethod method);
inline Mode parse_mode(std::string_view text);
inline ConfidenceMethod parse_confidence_method(std::string_view text);

namespace detail {
template <typename Derived>
bool same_values(const Eigen::DenseBase<Derived>& a, const Eigen::DenseBase<Derived>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a.derived() == b.derived());
}
}  // namespace detail

struct ArmSpec {
    std::size_t arm_id = 0;
    std::string name;
    double cost_per_token = 0.0;  // rho_i

    bool operator==(const ArmSpec&) const = default;
};

struct Instance {
    std::string instance_id;
    Eigen::VectorXd embedding;
    std::vector<std::int64_t> token_counts;          // H_i(x_t), one per arm
    std::vector<std::optional<Label>> cached_labels;  // replayed votes, one per arm
    std::optional<Label> true_label;

    bool operator==(const Instance& other) const {
        return instance_id == other.instance_id && detail::same_values(embedding, other.embedding) &&
               token_counts == other.token_counts && cached_labels == other.cached_labels &&
               true_label == other.true_label;
    }
};

struct PolicyConfig {
    double delta = 0.9;
    std::size_t k_min = 1;
    double alpha_explore = 0.25;
    double lambda_L = 1.0;
    double lambda_R = 1.0;
    Mode mode = Mode::camvo;
    ConfidenceMethod confidence_method = ConfidenceMethod::beta_cdf;
    std::size_t mc_samples = 2000;
    std::uint64_t seed = 0;
    double epsilon = 1e-6;

    bool operator==(const PolicyConfig&) const = default;
};

/// Online mean / sum of squared deviations (Welford).
struct MomentStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    /// Population variance (divides by count).
    double variance() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }

    bool operator==(const MomentStats&) const = default;
};

/// Shapes of the two Beta likelihoods: class 1 (agreed with the vote) and class 0.
struct BetaParams {
    double alpha1 = 1.0;
    double beta1 = 1.0;
    double alpha0 = 1.0;
    double beta0 = 1.0;

    bool operator==(const BetaParams&) const = default;
};

/// One annotator's online state.
struct ArmState {
    Eigen::MatrixXd A;
    Eigen::MatrixXd A_inv;
    Eigen::VectorXd b;
    std::int64_t queries = 0;        // N_i
    std::int64_t correct_count = 0;  // rounds where the arm agreed with the prediction
    BetaParams beta;
    MomentStats class_stats[2];  // indexed by h
    bool class_fitted[2] = {false, false};
    std::int64_t updates_since_reinversion = 0;

    static constexpr std::int64_t kReinversionPeriod = 1000;

    static ArmState fresh(std::size_t dim, double lambda_L) {
        ArmState s;
        s.A = lambda_L * Eigen::MatrixXd::Identity(dim, dim);
        s.A_inv = (1.0 / lambda_L) * Eigen::MatrixXd::Identity(dim, dim);
        s.b = Eigen::VectorXd::Zero(dim);
        return s;
    }

    std::size_t dim() const { return static_cast<std::size_t>(b.size()); }

    /// Relative accuracy. Before the first counted query this is 1 (optimistic start).
    double mu() const {
        return queries > 0 ? static_cast<double>(correct_count) / static_cast<double>(queries)
                           : 1.0;
    }

    bool mixture_ready() const { return class_fitted[0] && class_fitted[1]; }

    /// Ridge update A += e e^T, b += r e. A_inv follows by Sherman-Morrison and is
    /// recomputed from A every kReinversionPeriod updates.
    void add_observation(const Eigen::VectorXd& e, double reward) {
        A.noalias() += e * e.transpose();
        b.noalias() += reward * e;
        if (++updates_since_reinversion >= kReinversionPeriod) {
            reinvert();
            return;
        }
        const Eigen::VectorXd u = A_inv * e;
        const double denom = 1.0 + e.dot(u);
        A_inv.noalias() -= (u * u.transpose()) / denom;
    }

    void reinvert() {
        A_inv = A.llt().solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
        updates_since_reinversion = 0;
    }

    /// max |A_inv * A - I| over all entries.
    double inverse_residual() const {
        return (A_inv * A - Eigen::MatrixXd::Identity(A.rows(), A.cols())).cwiseAbs().maxCoeff();
    }

    bool operator==(const ArmState& o) const {
        return detail::same_values(A, o.A) && detail::same_values(A_inv, o.A_inv) &&
               detail::same_values(b, o.b) && queries == o.queries &&
               correct_count == o.correct_count && beta == o.beta &&
               class_stats[0] == o.class_stats[0] && class_stats[1] == o.class_stats[1] &&
               class_fitted[0] == o.class_fitted[0] && class_fitted[1] == o.class_fitted[1] &&
               updates_since_reinversion == o.updates_since_reinversion;
    }
};

struct ConfidenceRecord {
    double q = 0.0;      // raw ridge estimate
    double width = 0.0;  // exploration width C
    double theta = 0.0;  // clip(q - C, 0, 1)
    double L_bar = 0.0;  // mixture posterior
    double L = 0.0;      // smoothed lower bound
    double omega = 0.0;  // vote weight

    bool operator==(const ConfidenceRecord&) const = default;
};

struct SubsetDecision {
    std::vector<std::size_t> arms;  // ascending arm ids
    double confidence = 0.0;
    double cost = 0.0;
    bool fell_back_to_all = false;

    ArmMask mask() const {
        ArmMask m = 0;
        for (auto a : arms) m |= ArmMask{1} << a;
        return m;
    }

    bool operator==(const SubsetDecision&) const = default;
};

struct RoundRecord {
    std::size_t t = 0;
    SubsetDecision decision;
    std::vector<Label> votes;  // aligned with decision.arms
    Label predicted = 0;
    std::vector<int> rewards;  // aligned with decision.arms
    std::optional<Label> true_label;
    double cumulative_cost = 0.0;
    std::optional<double> cumulative_accuracy;

    bool operator==(const RoundRecord&) const = default;
};

struct DatasetHeader {
    std::size_t dim = 0;     // d
    std::size_t arm_count = 0;  // K
    std::size_t label_count = 0;  // M
    std::vector<ArmSpec> arms;
    std::vector<std::string> label_names;

    bool operator==(const DatasetHeader&) const = default;
};

struct RunContext {
    std::size_t arm_count = 0;
    std::size_t dim = 0;
    std::size_t label_count = 0;
    std::uint64_t seed = 0;
};

inline std::vector<std::size_t> mask_to_arms(ArmMask mask) {
    std::vector<std::size_t> arms;
    for (std::size_t i = 0; mask != 0; ++i, mask >>= 1)
        if (mask & 1U) arms.push_back(i);
    return arms;
}

inline ArmMask full_mask(std::size_t arm_count) {
    return arm_count >= 32 ? ~ArmMask{0} : (ArmMask{1} << arm_count) - 1;
}

inline RunContext validate_run_config(const PolicyConfig& config, const std::vector<ArmSpec>& arms,
                                      const DatasetHeader& header) {
    const std::size_t K = arms.size();
    if (K == 0) throw Error("no arms configured");
    if (K > kMaxArms) throw Error("arm count " + std::to_string(K) + " exceeds the supported " +
                                  std::to_string(kMaxArms));
    if (header.arm_count != K)
        throw Error("dimension mismatch: header declares " + std::to_string(header.arm_count) +
                    " arms but " + std::to_string(K) + " arm specs were given");
    std::vector<bool> seen(K, false);
    for (const auto& arm : arms) {
        if (arm.arm_id >= K) throw Error("arm id " + std::to_string(arm.arm_id) + " out of range");
        if (seen[arm.arm_id]) throw Error("duplicate arm id " + std::to_string(arm.arm_id));
        seen[arm.arm_id] = true;
        if (!(arm.cost_per_token >= 0.0))
            throw Error("arm " + std::to_string(arm.arm_id) + " has negative cost");
    }
    if (header.dim == 0) throw Error("dimension mismatch: embedding dimension must be positive");
    if (header.label_count < 2) throw Error("label count M must be at least 2");
    if (config.k_min < 1) throw Error("k_min must be at least 1");
    if (config.k_min > K) throw Error("k_min exceeds arm count");
    if (!(config.delta >= 0.0 && config.delta <= 1.0)) throw Error("delta must lie in [0,1]");
    if (!(config.alpha_explore >= 0.0)) throw Error("alpha_explore must be nonnegative");
    if (!(config.lambda_L > 0.0)) throw Error("lambda_L must be positive");
    if (!(config.lambda_R >= 0.0)) throw Error("lambda_R must be nonnegative");
    if (!(config.epsilon > 0.0)) throw Error("epsilon must be positive");
    if (config.mc_samples == 0) throw Error("mc_samples must be positive");
    if (config.mode == Mode::ccamvo && config.confidence_method != ConfidenceMethod::monte_carlo)
        throw Error("mode ccamvo requires confidence_method monte_carlo");
    return RunContext{K, header.dim, header.label_count, config.seed};
}

inline void validate_instance(const RunContext& ctx, const Instance& inst) {
    if (static_cast<std::size_t>(inst.embedding.size()) != ctx.dim)
        throw Error("dimension mismatch in instance '" + inst.instance_id + "': embedding has " +
                    std::to_string(inst.embedding.size()) + " entries, expected " +
                    std::to_string(ctx.dim));
    if (inst.token_counts.size() != ctx.arm_count)
        throw Error("instance '" + inst.instance_id + "' has " +
                    std::to_string(inst.token_counts.size()) + " token counts, expected " +
                    std::to_string(ctx.arm_count));
    for (auto h : inst.token_counts)
        if (h < 1) throw Error("instance '" + inst.instance_id + "' has a token count below 1");
    if (!inst.cached_labels.empty() && inst.cached_labels.size() != ctx.arm_count)
        throw Error("instance '" + inst.instance_id + "' has a vote list of the wrong length");
    const auto in_range = [&](Label l) {
        return l >= 0 && static_cast<std::size_t>(l) < ctx.label_count;
    };
    for (const auto& l : inst.cached_labels)
        if (l && !in_range(*l))
            throw Error("instance '" + inst.instance_id + "' has a vote outside [0, M)");
    if (inst.true_label && !in_range(*inst.true_label))
        throw Error("instance '" + inst.instance_id + "' has a label outside [0, M)");
}

inline std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::camvo: return "camvo";
        case Mode::ccamvo: return "ccamvo";
        case Mode::baseline: return "baseline";
        case Mode::full_majority: return "full_majority";
    }
    return "?";
}

inline std::string_view to_string(ConfidenceMethod method) {
    switch (method) {
        case ConfidenceMethod::exact: return "exact";
        case ConfidenceMethod::beta_cdf: return "beta_cdf";
        case ConfidenceMethod::monte_carlo: return "monte_carlo";
    }
    return "?";
}

inline Mode parse_mode(std::string_view text) {
    for (Mode m : {Mode::camvo, Mode::ccamvo, Mode::baseline, Mode::full_majority})
        if (to_string(m) == text) return m;
    throw Error("unknown mode '" + std::string(text) + "'");
}

inline ConfidenceMethod parse_confidence_method(std::string_view text) {
    for (auto m : {ConfidenceMethod::exact, ConfidenceMethod::beta_cdf,
                   ConfidenceMethod::monte_carlo})
        if (to_string(m) == text) return m;
    throw Error("unknown confidence method '" + std::string(text) + "'");
}

}  // namespace camvo
