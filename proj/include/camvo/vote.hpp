#pragma once

// Weighted majority voting, agreement rewards, and the query-everything
// online weighted-majority baseline.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "camvo/core.hpp"

namespace camvo {

/// Label with the largest total weight; ties go to the smallest label index.
/// If every weight is zero the vote is unweighted.
inline Label weighted_majority(std::span<const Label> votes, std::span<const double> weights,
                               std::size_t label_count) {
    if (votes.empty()) throw Error("weighted_majority: no votes");
    if (votes.size() != weights.size()) throw Error("weighted_majority: weights misaligned");
    bool any_weight = false;
    for (double w : weights) any_weight = any_weight || w > 0.0;

    std::vector<double> tally(label_count, 0.0);
    std::vector<bool> present(label_count, false);
    for (std::size_t i = 0; i < votes.size(); ++i) {
        const auto label = static_cast<std::size_t>(votes[i]);
        if (votes[i] < 0 || label >= label_count) throw Error("weighted_majority: vote out of range");
        tally[label] += any_weight ? weights[i] : 1.0;
        present[label] = true;
    }
    Label best = -1;
    for (std::size_t m = 0; m < label_count; ++m) {
        if (!present[m]) continue;
        if (best < 0 || tally[m] > tally[static_cast<std::size_t>(best)]) best = static_cast<Label>(m);
    }
    return best;
}

inline std::vector<int> rewards_from_vote(std::span<const Label> votes, Label predicted) {
    std::vector<int> r(votes.size());
    for (std::size_t i = 0; i < votes.size(); ++i) r[i] = votes[i] == predicted ? 1 : 0;
    return r;
}

/// Online weighted majority over all arms. Each arm's weight is its empirical
/// agreement rate with past predictions; every weight starts at 1.
class BaselineVoter {
  public:
    struct Step {
        Label predicted = 0;
        std::vector<double> weights;  // after the update
    };

    explicit BaselineVoter(std::size_t arm_count)
        : weights_(arm_count, 1.0), agreements_(arm_count, 0), queries_(arm_count, 0) {}

    const std::vector<double>& weights() const { return weights_; }

    Step step(std::span<const Label> votes, std::size_t label_count) {
        if (votes.size() != weights_.size())
            throw Error("baseline_step: expected one vote per arm");
        const Label predicted = weighted_majority(votes, weights_, label_count);
        for (std::size_t i = 0; i < votes.size(); ++i) {
            ++queries_[i];
            if (votes[i] == predicted) ++agreements_[i];
            weights_[i] = static_cast<double>(agreements_[i]) / static_cast<double>(queries_[i]);
        }
        return {predicted, weights_};
    }

  private:
    std::vector<double> weights_;
    std::vector<std::int64_t> agreements_;
    std::vector<std::int64_t> queries_;
};

}  // namespace camvo
