#pragma once

// Vote confidence of an arm subset and the minimum-cost subset search.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "camvo/core.hpp"
#include "camvo/correlation.hpp"
#include "camvo/rng.hpp"
#include "camvo/special.hpp"

namespace camvo {

inline constexpr std::size_t kMaxExactArms = 20;

/// Relative slack in the strict majority test; coalitions within it of exactly
/// half the weight count as ties, and a tie is a loss.
inline constexpr double kMajoritySlack = 1e-12;

inline bool wins_majority(double correct_weight, double total_weight) {
    return 2.0 * correct_weight - total_weight > kMajoritySlack * total_weight;
}

/// Probability that the weighted majority over `arms` is correct when arm i is
/// independently correct with probability L[i]: the sum over winning coalitions S
/// of prod_{i in S} L_i prod_{j not in S} (1 - L_j).
inline double subset_confidence_exact(std::span<const std::size_t> arms, std::span<const double> L,
                                      std::span<const double> omega) {
    const std::size_t n = arms.size();
    if (n > kMaxExactArms) throw Error("subset too large for exact enumeration");
    double total = 0.0;
    for (auto a : arms) total += omega[a];
    double confidence = 0.0;
    const std::uint64_t outcomes = std::uint64_t{1} << n;
    for (std::uint64_t s = 0; s < outcomes; ++s) {
        double weight = 0.0;
        double prob = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto a = arms[k];
            if (s >> k & 1U) {
                weight += omega[a];
                prob *= L[a];
            } else {
                prob *= 1.0 - L[a];
            }
        }
        if (wins_majority(weight, total)) confidence += prob;
    }
    return confidence;
}

/// 1 - F_Beta(1/2; W_L, W - W_L) with W = sum omega_i and W_L = sum omega_i L_i.
inline double subset_confidence_beta(std::span<const std::size_t> arms, std::span<const double> L,
                                     std::span<const double> omega) {
    double w = 0.0;
    double wl = 0.0;
    for (auto a : arms) {
        w += omega[a];
        wl += omega[a] * L[a];
    }
    if (wl <= 0.0) return 0.0;
    if (w - wl <= 0.0) return 1.0;
    return 1.0 - special::beta_cdf(0.5, wl, w - wl);
}

/// Fraction of n copula draws in which the correct arms of the subset carry a strict
/// weighted majority. mu, omega, and C are indexed by arm id.
inline double subset_confidence_mc(std::span<const std::size_t> arms, std::span<const double> mu,
                                   std::span<const double> omega, const Eigen::MatrixXd& C,
                                   std::size_t n, std::uint64_t seed) {
    const auto k = static_cast<Eigen::Index>(arms.size());
    if (k == 0 || n == 0) return 0.0;
    Eigen::MatrixXd sub(k, k);
    std::vector<double> sub_mu(arms.size());
    std::vector<double> sub_w(arms.size());
    double total = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
        const auto i = arms[static_cast<std::size_t>(r)];
        sub_mu[static_cast<std::size_t>(r)] = mu[i];
        sub_w[static_cast<std::size_t>(r)] = omega[i];
        total += omega[i];
        for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = C(i, arms[static_cast<std::size_t>(c)]);
    }
    const BinaryMatrix draws = sample_correlated_binary(n, sub_mu, sub, seed);
    std::size_t wins = 0;
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
        double weight = 0.0;
        for (Eigen::Index c = 0; c < k; ++c)
            if (draws(r, c)) weight += sub_w[static_cast<std::size_t>(c)];
        if (wins_majority(weight, total)) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(n);
}

struct SubsetQuery {
    std::vector<double> L;
    std::vector<double> omega;
    std::vector<double> costs;  // rho_i * H_i(x_t)
    double delta = 0.9;
    std::size_t k_min = 1;
    ConfidenceMethod method = ConfidenceMethod::exact;
    std::optional<Eigen::MatrixXd> correlation;  // monte_carlo only
    std::optional<std::vector<double>> mu;       // monte_carlo marginals
    std::size_t mc_samples = 2000;
    std::uint64_t mc_seed = 0;  // per-subset streams are derived from this and the mask
};

inline double subset_confidence(const SubsetQuery& query, ArmMask mask) {
    const std::vector<std::size_t> arms = mask_to_arms(mask);
    switch (query.method) {
        case ConfidenceMethod::exact: return subset_confidence_exact(arms, query.L, query.omega);
        case ConfidenceMethod::beta_cdf: return subset_confidence_beta(arms, query.L, query.omega);
        case ConfidenceMethod::monte_carlo: {
            const std::size_t K = query.L.size();
            const Eigen::MatrixXd C = query.correlation
                                          ? *query.correlation
                                          : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(K),
                                                                      static_cast<Eigen::Index>(K));
            const std::vector<double>& marginals = query.mu ? *query.mu : query.L;
            return subset_confidence_mc(arms, marginals, query.omega, C, query.mc_samples,
                                        derive_seed(query.mc_seed, mask));
        }
    }
    throw Error("unknown confidence method");
}

inline double subset_cost(std::span<const double> costs, ArmMask mask) {
    double c = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i)
        if (mask >> i & 1U) c += costs[i];
    return c;
}

namespace detail {

// Lexicographic order of the ascending arm lists encoded by two masks.
inline bool arms_lex_less(ArmMask a, ArmMask b) {
    while (a != 0 && b != 0) {
        const int la = std::countr_zero(a);
        const int lb = std::countr_zero(b);
        if (la != lb) return la < lb;
        a &= a - 1;
        b &= b - 1;
    }
    return a == 0 && b != 0;
}

inline bool same_cost(double a, double b) {
    return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace detail

/// Cheapest subset with at least k_min arms whose confidence reaches delta.
/// Candidates are visited in ascending cost; within a cost tie the most confident
/// feasible subset wins, then the lexicographically smallest arm list. When no
/// subset qualifies, every arm is selected.
inline SubsetDecision find_min_cost_subset(const SubsetQuery& query) {
    const std::size_t K = query.L.size();
    if (K == 0 || K > kMaxArms) throw Error("find_min_cost_subset: unsupported arm count");
    if (query.omega.size() != K || query.costs.size() != K)
        throw Error("find_min_cost_subset: arrays must have one entry per arm");
    const std::size_t min_size = std::min(std::max<std::size_t>(query.k_min, 1), K);

    struct Candidate {
        ArmMask mask;
        double cost;
    };
    std::vector<Candidate> candidates;
    const ArmMask all = full_mask(K);
    for (ArmMask m = 1; m <= all && m != 0; ++m)
        if (static_cast<std::size_t>(std::popcount(m)) >= min_size)
            candidates.push_back({m, subset_cost(query.costs, m)});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        return detail::arms_lex_less(a.mask, b.mask);
    });

    for (std::size_t g = 0; g < candidates.size();) {
        std::size_t end = g + 1;
        while (end < candidates.size() && detail::same_cost(candidates[g].cost, candidates[end].cost))
            ++end;
        std::optional<std::size_t> best;
        double best_conf = 0.0;
        for (std::size_t c = g; c < end; ++c) {
            const double conf = subset_confidence(query, candidates[c].mask);
            if (conf >= query.delta && (!best || conf > best_conf)) {
                best = c;
                best_conf = conf;
            }
        }
        if (best) {
            const Candidate& pick = candidates[*best];
            return {mask_to_arms(pick.mask), best_conf, pick.cost, false};
        }
        g = end;
    }
    return {mask_to_arms(all), subset_confidence(query, all), subset_cost(query.costs, all), true};
}

}  // namespace camvo
