#include "fmcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fmcl {

namespace {

void check_inputs(std::span<const double> probabilities, std::span<const int> labels, std::size_t num_classes)
{
    if (labels.empty()) throw std::invalid_argument("evaluate: empty input");
    if (num_classes == 0 || probabilities.size() != labels.size() * num_classes) {
        throw std::invalid_argument("evaluate: probability matrix does not match labels x classes");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            throw std::invalid_argument("evaluate: label " + std::to_string(y) + " out of range");
        }
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        double total = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) total += probabilities[i * num_classes + c];
        if (!(std::abs(total - 1.0) <= 1e-6)) {
            throw std::invalid_argument("evaluate: probabilities of sample " + std::to_string(i) + " do not sum to 1");
        }
    }
}

}  // namespace

std::optional<double> one_vs_rest_auc(std::span<const double> probabilities, std::span<const int> labels,
                                      std::size_t num_classes, std::size_t cls)
{
    const std::size_t n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto score = [&](std::size_t i) { return probabilities[i * num_classes + cls]; };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score(a) < score(b); });

    // Average ranks are half-integers, so the rank sum is exact in double.
    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start;
        while (end < n && score(order[end]) == score(order[start])) ++end;
        const double avg_rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t k = start; k < end; ++k) {
            if (static_cast<std::size_t>(labels[order[k]]) == cls) {
                positive_rank_sum += avg_rank;
                ++positives;
            }
        }
        start = end;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) return std::nullopt;
    const double p = static_cast<double>(positives);
    const double wins = positive_rank_sum - p * (p + 1.0) / 2.0;
    return wins / (p * static_cast<double>(negatives));
}

MetricsReport evaluate(std::span<const double> probabilities, std::span<const int> labels, std::size_t num_classes)
{
    check_inputs(probabilities, labels, num_classes);
    const std::size_t n = labels.size();

    MetricsReport report;
    report.support.assign(num_classes, 0);
    std::vector<std::size_t> tp(num_classes, 0);
    std::vector<std::size_t> predicted(num_classes, 0);
    std::size_t correct = 0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = probabilities.subspan(i * num_classes, num_classes);
        const auto y = static_cast<std::size_t>(labels[i]);
        // max_element returns the first maximum, so ties go to the lowest class id.
        const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        ++report.support[y];
        ++predicted[pred];
        if (pred == y) {
            ++correct;
            ++tp[y];
        }
        loss -= std::log(std::max(row[y], 1e-300));
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    report.loss = loss / static_cast<double>(n);

    double f1_total = 0.0;
    std::size_t present = 0;
    double auc_total = 0.0;
    std::size_t auc_classes = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (report.support[c] == 0) continue;
        ++present;
        const auto fp = predicted[c] - tp[c];
        const auto fn = report.support[c] - tp[c];
        const auto denom = 2 * tp[c] + fp + fn;
        f1_total += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
        if (const auto auc = one_vs_rest_auc(probabilities, labels, num_classes, c)) {
            auc_total += *auc;
            ++auc_classes;
        }
    }
    report.macro_f1 = f1_total / static_cast<double>(present);
    if (auc_classes > 0) report.macro_auc = auc_total / static_cast<double>(auc_classes);
    return report;
}

}  // namespace fmcl
