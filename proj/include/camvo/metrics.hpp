#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "camvo/core.hpp"

namespace camvo {

struct LabelMetrics {
    Label label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    bool undefined = false;  // some ratio had an empty denominator and was set to 0
};

struct Metrics {
    double accuracy = 0.0;
    std::vector<LabelMetrics> per_label;
};

inline Metrics compute_metrics(std::span<const Label> predicted, std::span<const Label> truth,
                               std::size_t label_count) {
    if (predicted.size() != truth.size()) throw Error("compute_metrics: length mismatch");
    Metrics m;
    m.per_label.resize(label_count);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const auto p = static_cast<std::size_t>(predicted[i]);
        const auto y = static_cast<std::size_t>(truth[i]);
        if (p >= label_count || y >= label_count) throw Error("compute_metrics: label out of range");
        if (p == y) {
            ++correct;
            ++m.per_label[p].true_positives;
        } else {
            ++m.per_label[p].false_positives;
            ++m.per_label[y].false_negatives;
        }
    }
    m.accuracy = predicted.empty() ? 0.0
                                   : static_cast<double>(correct) / static_cast<double>(predicted.size());
    for (std::size_t l = 0; l < label_count; ++l) {
        LabelMetrics& lm = m.per_label[l];
        lm.label = static_cast<Label>(l);
        const auto tp = static_cast<double>(lm.true_positives);
        const auto pred_pos = tp + static_cast<double>(lm.false_positives);
        const auto real_pos = tp + static_cast<double>(lm.false_negatives);
        if (pred_pos > 0) lm.precision = tp / pred_pos; else lm.undefined = true;
        if (real_pos > 0) lm.recall = tp / real_pos; else lm.undefined = true;
        if (lm.precision + lm.recall > 0)
            lm.f1 = 2.0 * lm.precision * lm.recall / (lm.precision + lm.recall);
        else
            lm.undefined = true;
    }
    return m;
}

}  // namespace camvo
