#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fmcl {

struct MetricsReport {
    double accuracy = 0.0;
    /// Mean F1 over classes present in the labels.
    double macro_f1 = 0.0;
    /// Mean one-vs-rest AUC over present classes that have both positives and
    /// negatives; absent when no class qualifies.
    std::optional<double> macro_auc;
    /// Mean cross-entropy of the labelled class.
    double loss = 0.0;
    std::vector<std::size_t> support;
};

/// Row-major probabilities, one row of `num_classes` per sample.
MetricsReport evaluate(std::span<const double> probabilities, std::span<const int> labels, std::size_t num_classes);

/// One-vs-rest AUC of one class: P(score_pos > score_neg) + 0.5 P(tie), via
/// average ranks. Absent without both positives and negatives.
std::optional<double> one_vs_rest_auc(std::span<const double> probabilities, std::span<const int> labels,
                                      std::size_t num_classes, std::size_t cls);

}  // namespace fmcl
