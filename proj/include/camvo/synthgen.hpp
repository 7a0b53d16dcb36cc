#pragma once

// Synthetic correlated annotator data: copula calibration to target binary
// correlations, context-dependent latent scores, thresholded correctness bits,
// and conversion to a replayable dataset.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "camvo/core.hpp"
#include "camvo/correlation.hpp"
#include "camvo/dataset.hpp"
#include "camvo/rng.hpp"
#include "camvo/special.hpp"

namespace camvo {

struct SyntheticConfig {
    std::size_t rounds = 1000;  // T
    std::size_t arm_count = 2;  // K
    std::size_t dim = 5;        // d
    std::vector<double> mu_targets;
    Eigen::MatrixXd C_target;
    double alpha_ctx = 0.1;  // weight of the shared context direction
    double sigma = 0.5;      // latent noise scale
    std::uint64_t seed = 0;
    bool standardize_latent = false;
    std::vector<double> costs;  // currency per million tokens, one per arm
    std::vector<std::string> arm_names;
};

/// Seven-arm cost and accuracy preset taken from the MMLU benchmark runs.
inline SyntheticConfig mmlu_preset() {
    SyntheticConfig c;
    c.arm_count = 7;
    c.dim = 5;
    c.sigma = 0.5;
    c.alpha_ctx = 0.1;
    c.costs = {0.05, 1.1, 0.59, 2.5, 3.0, 1.1, 0.8};
    c.mu_targets = {0.6801, 0.8482, 0.8170, 0.8358, 0.8565, 0.8592, 0.6409};
    c.arm_names = {"llama-3.1-8b", "o1-mini",           "llama-3.3-70b",   "gpt-4o",
                   "claude-3-7-sonnet", "o3-mini", "claude-3-5-haiku"};
    c.C_target = Eigen::MatrixXd::Identity(7, 7);
    return c;
}

/// Unit diagonal, gamma everywhere else.
inline Eigen::MatrixXd uniform_correlation(std::size_t k, double gamma) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(k),
                                                  static_cast<Eigen::Index>(k), gamma);
    C.diagonal().setOnes();
    return C;
}

/// Correlation of 1{Z_i > Phi^-1(1 - mu_i)} and 1{Z_j > Phi^-1(1 - mu_j)} when
/// (Z_i, Z_j) is standard bivariate normal with correlation rho.
inline double thresholded_correlation(double mu_i, double mu_j, double rho) {
    const double a = special::normal_quantile(1.0 - mu_i);
    const double b = special::normal_quantile(1.0 - mu_j);
    const double p11 = special::bivariate_upper_orthant(a, b, rho, 1e-9);
    return (p11 - mu_i * mu_j) / std::sqrt(mu_i * (1.0 - mu_i) * mu_j * (1.0 - mu_j));
}

struct CorrelationRange {
    double lo;
    double hi;
};

/// Frechet bounds on the correlation of two Bernoulli variables with these means.
inline CorrelationRange attainable_correlation(double mu_i, double mu_j) {
    const double scale = std::sqrt(mu_i * (1.0 - mu_i) * mu_j * (1.0 - mu_j));
    const double p_lo = std::max(0.0, mu_i + mu_j - 1.0);
    const double p_hi = std::min(mu_i, mu_j);
    return {(p_lo - mu_i * mu_j) / scale, (p_hi - mu_i * mu_j) / scale};
}

/// Latent correlation rho whose thresholded binary correlation matches `target`,
/// by bisection on rho until the binary correlation is within `tol`.
inline double solve_latent_correlation(double mu_i, double mu_j, double target,
                                       double tol = 1e-4) {
    constexpr double kEdge = 1.0 - 1e-9;
    double lo = -kEdge;
    double hi = kEdge;
    if (thresholded_correlation(mu_i, mu_j, lo) >= target) return lo;
    if (thresholded_correlation(mu_i, mu_j, hi) <= target) return hi;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double gap = thresholded_correlation(mu_i, mu_j, mid) - target;
        if (std::fabs(gap) < tol) return mid;
        (gap < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline Eigen::MatrixXd calibrate_copula(const std::vector<double>& mu, const Eigen::MatrixXd& target,
                                        double tol = 1e-4) {
    const auto K = static_cast<Eigen::Index>(mu.size());
    if (target.rows() != K || target.cols() != K)
        throw Error("calibrate_copula: target matrix shape does not match the marginals");
    for (double m : mu)
        if (!(m > 0.0 && m < 1.0)) throw Error("calibrate_copula: target accuracies must lie in (0,1)");
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(K, K);
    for (Eigen::Index i = 0; i < K; ++i) {
        for (Eigen::Index j = i + 1; j < K; ++j) {
            const double c = target(i, j);
            if (std::fabs(c - target(j, i)) > 1e-12)
                throw Error("calibrate_copula: target matrix is not symmetric");
            const auto mi = mu[static_cast<std::size_t>(i)];
            const auto mj = mu[static_cast<std::size_t>(j)];
            const CorrelationRange range = attainable_correlation(mi, mj);
            if (c < range.lo - 1e-9 || c > range.hi + 1e-9) {
                std::ostringstream msg;
                msg << "calibrate_copula: target correlation " << c << " for pair (" << i << ", "
                    << j << ") is outside the attainable interval [" << range.lo << ", "
                    << range.hi << "]";
                throw Error(msg.str());
            }
            R(i, j) = R(j, i) = solve_latent_correlation(mi, mj, c, tol);
        }
    }
    return make_psd(R);
}

struct SyntheticData {
    Eigen::MatrixXd contexts;      // T x d
    BinaryMatrix rewards;          // T x K, 1 = the arm is correct
    Eigen::MatrixXd weights;       // K x d, row a = theta_a
    Eigen::MatrixXd latent_corr;   // R
};

inline void check_config(const SyntheticConfig& cfg) {
    if (cfg.arm_count == 0 || cfg.dim == 0) throw Error("synthetic config: K and d must be positive");
    if (cfg.mu_targets.size() != cfg.arm_count)
        throw Error("synthetic config: need one target accuracy per arm");
    if (!(cfg.alpha_ctx >= 0.0 && cfg.alpha_ctx <= 1.0))
        throw Error("synthetic config: alpha_ctx must lie in [0,1]");
    if (!(cfg.sigma > 0.0)) throw Error("synthetic config: sigma must be positive");
    const auto K = static_cast<Eigen::Index>(cfg.arm_count);
    if (cfg.C_target.rows() != K || cfg.C_target.cols() != K)
        throw Error("synthetic config: C_target must be K x K");
    for (Eigen::Index i = 0; i < K; ++i) {
        if (std::fabs(cfg.C_target(i, i) - 1.0) > 1e-12)
            throw Error("synthetic config: C_target must have a unit diagonal");
        for (Eigen::Index j = 0; j < K; ++j)
            if (std::fabs(cfg.C_target(i, j)) > 1.0)
                throw Error("synthetic config: C_target entries must lie in [-1,1]");
    }
}

/// theta_a = alpha * theta_shared + (1 - alpha) * theta_unique_a, all draws standard normal.
inline Eigen::MatrixXd draw_context_weights(const SyntheticConfig& cfg) {
    Engine rng = make_engine(derive_seed(cfg.seed, 0, StreamPurpose::synth_weights));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto K = static_cast<Eigen::Index>(cfg.arm_count);
    const auto d = static_cast<Eigen::Index>(cfg.dim);
    Eigen::VectorXd shared(d);
    for (Eigen::Index k = 0; k < d; ++k) shared(k) = gauss(rng);
    Eigen::MatrixXd theta(K, d);
    for (Eigen::Index a = 0; a < K; ++a)
        for (Eigen::Index k = 0; k < d; ++k)
            theta(a, k) = cfg.alpha_ctx * shared(k) + (1.0 - cfg.alpha_ctx) * gauss(rng);
    return theta;
}

/// Round loop with given context weights and latent correlation.
inline SyntheticData generate_from_weights(const SyntheticConfig& cfg, const Eigen::MatrixXd& theta,
                                           const Eigen::MatrixXd& latent_corr) {
    const auto K = static_cast<Eigen::Index>(cfg.arm_count);
    const auto d = static_cast<Eigen::Index>(cfg.dim);
    const auto T = static_cast<Eigen::Index>(cfg.rounds);
    const Eigen::MatrixXd factor = covariance_factor(latent_corr);
    std::vector<double> cut(cfg.arm_count);
    std::vector<double> scale(cfg.arm_count, 1.0);
    for (std::size_t a = 0; a < cfg.arm_count; ++a) {
        cut[a] = special::normal_quantile(1.0 - cfg.mu_targets[a]);
        if (cfg.standardize_latent)
            scale[a] = 1.0 / std::sqrt(theta.row(static_cast<Eigen::Index>(a)).squaredNorm() +
                                       cfg.sigma * cfg.sigma);
    }
    SyntheticData out;
    out.contexts.resize(T, d);
    out.rewards.resize(T, K);
    out.weights = theta;
    out.latent_corr = latent_corr;

    Engine rng = make_engine(derive_seed(cfg.seed, 0, StreamPurpose::synth_rounds));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd x(d);
    Eigen::VectorXd g(K);
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index k = 0; k < d; ++k) x(k) = gauss(rng);
        for (Eigen::Index a = 0; a < K; ++a) g(a) = gauss(rng);
        const Eigen::VectorXd eps = factor * g;
        const Eigen::VectorXd signal = theta * x;
        out.contexts.row(t) = x.transpose();
        for (Eigen::Index a = 0; a < K; ++a) {
            const auto ai = static_cast<std::size_t>(a);
            const double z = (signal(a) + cfg.sigma * eps(a)) * scale[ai];
            out.rewards(t, a) = z > cut[ai] ? 1 : 0;
        }
    }
    return out;
}

inline SyntheticData generate_dataset(const SyntheticConfig& cfg) {
    check_config(cfg);
    const Eigen::MatrixXd R = calibrate_copula(cfg.mu_targets, cfg.C_target);
    return generate_from_weights(cfg, draw_context_weights(cfg), R);
}

struct EmitOptions {
    std::size_t label_count = 4;  // M
    bool bias_feature = true;     // append a constant 1 to each embedding
};

/// Converts correctness bits into concrete votes: a correct arm votes the true label,
/// an incorrect one a uniformly drawn wrong label. Every arm costs one token.
inline Dataset to_replayable(const SyntheticConfig& cfg, const SyntheticData& data,
                             const EmitOptions& opts = {}) {
    if (opts.label_count < 2) throw Error("emit: M must be at least 2");
    Dataset ds;
    const std::size_t d = cfg.dim + (opts.bias_feature ? 1 : 0);
    ds.header.dim = d;
    ds.header.arm_count = cfg.arm_count;
    ds.header.label_count = opts.label_count;
    for (std::size_t a = 0; a < cfg.arm_count; ++a) {
        ArmSpec spec;
        spec.arm_id = a;
        spec.name = a < cfg.arm_names.size() ? cfg.arm_names[a] : "arm" + std::to_string(a);
        const double per_million = a < cfg.costs.size() ? cfg.costs[a] : 1.0;
        spec.cost_per_token = per_million * 1e-6;
        ds.header.arms.push_back(std::move(spec));
    }
    Engine rng = make_engine(derive_seed(cfg.seed, 0, StreamPurpose::synth_labels));
    const auto M = static_cast<std::uint64_t>(opts.label_count);
    ds.instances.reserve(cfg.rounds);
    for (Eigen::Index t = 0; t < data.contexts.rows(); ++t) {
        Instance inst;
        inst.instance_id = "s" + std::to_string(t);
        inst.embedding.resize(static_cast<Eigen::Index>(d));
        inst.embedding.head(data.contexts.cols()) = data.contexts.row(t).transpose();
        if (opts.bias_feature) inst.embedding(static_cast<Eigen::Index>(d) - 1) = 1.0;
        inst.token_counts.assign(cfg.arm_count, 1);
        const auto truth = static_cast<Label>(uniform_index(rng, M));
        inst.true_label = truth;
        for (Eigen::Index a = 0; a < data.rewards.cols(); ++a) {
            if (data.rewards(t, a)) {
                inst.cached_labels.emplace_back(truth);
            } else {
                auto wrong = static_cast<Label>(uniform_index(rng, M - 1));
                if (wrong >= truth) ++wrong;
                inst.cached_labels.emplace_back(wrong);
            }
        }
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

inline void emit_replayable(const SyntheticConfig& cfg, std::ostream& sink,
                            const EmitOptions& opts = {}) {
    write_dataset(sink, to_replayable(cfg, generate_dataset(cfg), opts));
}

}  // namespace camvo
