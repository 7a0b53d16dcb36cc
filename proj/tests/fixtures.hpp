#pragma once

#include <string>
#include <vector>

#include "camvo/core.hpp"
#include "camvo/dataset.hpp"
#include "camvo/rng.hpp"

namespace fixtures {

inline camvo::DatasetHeader header(std::size_t K, std::size_t d, std::size_t M, std::vector<double> rho = {}) {
    camvo::DatasetHeader h;
    h.arm_count = K;
    h.dim = d;
    h.label_count = M;
    for (std::size_t i = 0; i < K; ++i)
        h.arms.push_back({i, "arm" + std::to_string(i), i < rho.size() ? rho[i] : 1.0 + static_cast<double>(i)});
    return h;
}

inline camvo::Instance instance(std::string id, Eigen::VectorXd e, std::vector<camvo::Label> votes,
                                std::optional<camvo::Label> truth = std::nullopt) {
    camvo::Instance inst;
    inst.instance_id = std::move(id);
    inst.embedding = std::move(e);
    inst.token_counts.assign(votes.size(), 1);
    for (auto v : votes) inst.cached_labels.emplace_back(v);
    inst.true_label = truth;
    return inst;
}

/// Random replay dataset: arm i votes the truth with probability acc[i], else a random wrong label.
inline camvo::Dataset random_dataset(std::size_t T, std::size_t d, std::size_t M, const std::vector<double>& acc,
                                     std::uint64_t seed) {
    camvo::Dataset ds;
    ds.header = header(acc.size(), d, M);
    auto rng = camvo::make_engine(seed);
    std::normal_distribution<double> g;
    for (std::size_t t = 0; t < T; ++t) {
        Eigen::VectorXd e(static_cast<Eigen::Index>(d));
        for (Eigen::Index j = 0; j < e.size(); ++j) e(j) = g(rng);
        e(e.size() - 1) = 1.0;
        const auto truth = static_cast<camvo::Label>(camvo::uniform_index(rng, M));
        std::vector<camvo::Label> votes;
        for (double a : acc) {
            if (camvo::uniform01(rng) < a) {
                votes.push_back(truth);
            } else {
                auto w = static_cast<camvo::Label>(camvo::uniform_index(rng, M - 1));
                votes.push_back(w >= truth ? w + 1 : w);
            }
        }
        auto inst = instance("r" + std::to_string(t), e, votes, truth);
        for (std::size_t i = 0; i < acc.size(); ++i) inst.token_counts[i] = 1 + static_cast<std::int64_t>(t % 5 + i);
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

}  // namespace fixtures
