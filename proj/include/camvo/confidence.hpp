#pragma once

// Per-arm confidence pipeline: ridge estimate and its lower bound, the
// Beta-mixture posterior, log-weighted smoothing toward 1/2, and the vote weight.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "camvo/core.hpp"
#include "camvo/special.hpp"

namespace camvo {

struct LinucbEstimate {
    double q = 0.0;
    double width = 0.0;
    double theta = 0.0;
};

/// q = e' A^-1 b, C = alpha * sqrt(e' A^-1 e), theta = clip(q - C, 0, 1).
inline LinucbEstimate linucb_estimate(const ArmState& state, const Eigen::VectorXd& e,
                                      double alpha_explore) {
    if (static_cast<std::size_t>(e.size()) != state.dim())
        throw Error("linucb_estimate: embedding dimension mismatch");
    const Eigen::VectorXd Ae = state.A_inv * e;
    const double q = Ae.dot(state.b);
    const double quad = e.dot(Ae);
    const double width = alpha_explore * std::sqrt(std::max(quad, 0.0));
    if (!std::isfinite(q) || !std::isfinite(width))
        throw Error("linucb_estimate: non-finite estimate, arm state is corrupted");
    return {q, width, std::clamp(q - width, 0.0, 1.0)};
}

/// mu * f1(x) / (mu * f1(x) + (1 - mu) * f0(x)) with x clamped to [eps, 1 - eps].
inline double mixture_posterior(double mu, const BetaParams& shapes, double x, double epsilon) {
    const double xc = std::clamp(x, epsilon, 1.0 - epsilon);
    const double num = mu * special::beta_pdf(xc, shapes.alpha1, shapes.beta1);
    const double den = num + (1.0 - mu) * special::beta_pdf(xc, shapes.alpha0, shapes.beta0);
    if (!(den > 0.0)) return mu;
    return std::clamp(num / den, 0.0, 1.0);
}

/// Posterior probability that the arm agrees with the vote given a confidence value.
/// Until both classes have a fitted Beta the value is returned unchanged.
inline double beta_mixture_posterior(const ArmState& state, double value, double epsilon = 1e-6) {
    if (!state.mixture_ready()) return value;
    return mixture_posterior(state.mu(), state.beta, value, epsilon);
}

/// (L_bar * N + lambda_R * log(t + 1) / 2) / (N + lambda_R * log(t + 1)).
inline double regularize(double L_bar, std::int64_t N, double lambda_R, std::size_t t) {
    const double pull = lambda_R * std::log(static_cast<double>(t) + 1.0);
    const double n = static_cast<double>(N);
    const double den = n + pull;
    if (den <= 0.0) return L_bar;  // lambda_R = 0 and no data yet
    return (L_bar * n + 0.5 * pull) / den;
}

inline double vote_weight(double mu, double q) { return mu * std::max(q, 0.0); }

/// Pushes one observed confidence into class h and refits that class's Beta shapes
/// by the method of moments once it holds at least two samples.
inline void update_beta_params(ArmState& state, double q, int h, double epsilon) {
    const int cls = h ? 1 : 0;
    MomentStats& stats = state.class_stats[cls];
    stats.push(std::clamp(q, 0.0, 1.0));
    if (stats.count < 2) return;
    const double m = stats.mean;
    const double s2 = std::max(stats.variance(), epsilon);
    double nu = m * (1.0 - m) / s2 - 1.0;
    if (nu <= 0.0) nu = epsilon;
    double a = m * nu;
    double b = (1.0 - m) * nu;
    // a mean pinned at 0 or 1 would zero a shape; keep both strictly positive
    a = std::max(a, epsilon);
    b = std::max(b, epsilon);
    if (cls == 1) {
        state.beta.alpha1 = a;
        state.beta.beta1 = b;
    } else {
        state.beta.alpha0 = a;
        state.beta.beta0 = b;
    }
    state.class_fitted[cls] = true;
}

/// Full per-arm record for round t (1-based) using the state from round t - 1.
inline ConfidenceRecord compute_confidence(const ArmState& state, const Eigen::VectorXd& e,
                                           const PolicyConfig& config, std::size_t t) {
    const LinucbEstimate est = linucb_estimate(state, e, config.alpha_explore);
    ConfidenceRecord rec;
    rec.q = est.q;
    rec.width = est.width;
    rec.theta = est.theta;
    rec.L_bar = beta_mixture_posterior(state, est.theta, config.epsilon);
    rec.L = regularize(rec.L_bar, state.queries, config.lambda_R, t);
    rec.omega = vote_weight(state.mu(), est.q);
    return rec;
}

}  // namespace camvo
