#include "fmcl/autok.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace fmcl {

void AutoKConfig::validate() const
{
    if (k_max == 0) throw std::invalid_argument("autok: k_max must be positive");
    if (!(cv_low < cv_high)) throw std::invalid_argument("autok: cv_low must be below cv_high");
    for (const auto* w : {&window_low, &window_mid, &window_high}) {
        if (w->empty()) throw std::invalid_argument("autok: candidate windows must be non-empty");
        if (!std::is_sorted(w->begin(), w->end()) || w->front() == 0) {
            throw std::invalid_argument("autok: candidate windows must be ascending and positive");
        }
    }
}

double coefficient_of_variation(const DistanceMatrix& d)
{
    if (d.size() < 2) throw std::invalid_argument("cv: need at least two clients");
    const auto values = d.off_diagonal();
    double total = 0.0;
    for (double v : values) total += v;
    const double mean = total / static_cast<double>(values.size());
    if (mean == 0.0) return 0.0;
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return std::sqrt(sq / static_cast<double>(values.size())) / mean;
}

const std::vector<std::size_t>& window_for_cv(double cv, const AutoKConfig& config)
{
    if (cv < config.cv_low) return config.window_low;
    if (cv < config.cv_high) return config.window_mid;
    return config.window_high;
}

std::vector<std::size_t> clipped_window(double cv, std::size_t n, const AutoKConfig& config)
{
    const auto& base = window_for_cv(cv, config);
    const bool high = &base == &config.window_high;
    std::vector<std::size_t> out;
    for (std::size_t k : base) {
        if (k > n - 1) continue;
        if (high && k > config.k_max) continue;
        out.push_back(k);
    }
    return out;
}

std::vector<std::size_t> local_maxima(const std::vector<std::size_t>& ks, const std::map<std::size_t, double>& scores)
{
    std::vector<std::size_t> out;
    if (ks.size() == 1) return ks;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double s = scores.at(ks[i]);
        const bool above_left = i == 0 || s > scores.at(ks[i - 1]);
        const bool above_right = i + 1 == ks.size() || s > scores.at(ks[i + 1]);
        if (above_left && above_right) out.push_back(ks[i]);
    }
    return out;
}

namespace {

double score_for(const DistanceMatrix& d, Linkage linkage, std::size_t k, ClusterAssignment* keep = nullptr)
{
    auto assignment = agglomerate(d, linkage, StopAtK{k});
    const double s = silhouette_score(d, assignment);
    if (keep) *keep = std::move(assignment);
    return s;
}

}  // namespace

AutoKReport select_k(const DistanceMatrix& d, Linkage linkage, const AutoKConfig& config)
{
    config.validate();
    const std::size_t n = d.size();
    if (n < 2) throw std::invalid_argument("autok: need at least two clients");

    AutoKReport report;
    report.cv = coefficient_of_variation(d);
    report.window = clipped_window(report.cv, n, config);
    if (report.window.empty()) {
        throw std::invalid_argument("autok: candidate window is empty after clipping to n - 1 = " + std::to_string(n - 1));
    }
    for (std::size_t k : report.window) report.scores[k] = score_for(d, linkage, k);
    report.local_maxima = local_maxima(report.window, report.scores);

    if (!report.local_maxima.empty()) {
        if (config.rule == LocalMaxRule::largest_k) {
            report.selected_k = report.local_maxima.back();
        } else {
            report.selected_k = report.local_maxima.front();
            for (std::size_t k : report.local_maxima) {
                if (report.scores[k] > report.scores[report.selected_k]) report.selected_k = k;
            }
        }
    } else {
        report.used_fallback = true;
        std::vector<std::size_t> range{1};
        for (std::size_t k = 2; k <= std::min(config.k_max, n - 1); ++k) range.push_back(k);
        report.selected_k = 1;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k : range) {
            if (!report.scores.contains(k)) report.scores[k] = score_for(d, linkage, k);
            if (report.scores[k] > best) {
                best = report.scores[k];
                report.selected_k = k;
            }
        }
    }
    report.assignment = agglomerate(d, linkage, StopAtK{report.selected_k});
    return report;
}

std::string autok_report_to_json(const AutoKReport& report, Linkage linkage)
{
    nlohmann::ordered_json doc;
    doc["cv"] = report.cv;
    doc["window"] = report.window;
    auto scores = nlohmann::ordered_json::array();
    for (const auto& [k, s] : report.scores) scores.push_back({{"k", k}, {"silhouette", s}});
    doc["scores"] = std::move(scores);
    doc["local_maxima"] = report.local_maxima;
    doc["selected_k"] = report.selected_k;
    doc["used_fallback"] = report.used_fallback;
    doc["linkage"] = to_string(linkage);
    doc["labels"] = report.assignment.labels;
    return doc.dump(2) + "\n";
}

std::string to_string(LocalMaxRule rule)
{
    return rule == LocalMaxRule::highest_score ? "highest_score" : "largest_k";
}

LocalMaxRule parse_local_max_rule(const std::string& name)
{
    if (name == "highest_score") return LocalMaxRule::highest_score;
    if (name == "largest_k") return LocalMaxRule::largest_k;
    throw std::invalid_argument("unknown local maximum rule '" + name + "'");
}

}  // namespace fmcl
