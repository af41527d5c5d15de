#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fmcl/clustering.hpp"

namespace fmcl {

/// Which local maximum of the silhouette curve is selected.
enum class LocalMaxRule {
    highest_score,  ///< the local maximum with the largest S(K); ties go to the smaller K
    largest_k,      ///< the local maximum with the largest K
};

struct AutoKConfig {
    std::size_t k_max = 10;
    double cv_low = 0.35;
    double cv_high = 0.70;
    std::vector<std::size_t> window_low{1, 2, 3};
    std::vector<std::size_t> window_mid{2, 3, 4, 5, 6};
    std::vector<std::size_t> window_high{3, 4, 5, 6, 7, 8, 9, 10};
    LocalMaxRule rule = LocalMaxRule::highest_score;

    void validate() const;
};

struct AutoKReport {
    double cv = 0.0;
    std::vector<std::size_t> window;
    std::map<std::size_t, double> scores;
    std::vector<std::size_t> local_maxima;
    std::size_t selected_k = 1;
    bool used_fallback = false;
    ClusterAssignment assignment;
};

/// Population std / mean of the off-diagonal entries (both triangles).
/// An all-zero off-diagonal gives 0.
double coefficient_of_variation(const DistanceMatrix& d);

/// Candidate window for a CV value: [0, cv_low) -> low, [cv_low, cv_high) -> mid,
/// otherwise high. Unclipped.
const std::vector<std::size_t>& window_for_cv(double cv, const AutoKConfig& config);

/// Window clipped to K <= n - 1 (and K <= k_max for the high window).
std::vector<std::size_t> clipped_window(double cv, std::size_t n, const AutoKConfig& config);

/// Strict local maxima of an ordered score sequence. Endpoints compare
/// against their single neighbour; a one-element sequence is its own maximum.
std::vector<std::size_t> local_maxima(const std::vector<std::size_t>& ks, const std::map<std::size_t, double>& scores);

/// CV-guided window plus silhouette sweep. Falls back to the argmax of S(K)
/// over {1} and {2, ..., min(k_max, n - 1)} when the window has no local maximum.
AutoKReport select_k(const DistanceMatrix& d, Linkage linkage, const AutoKConfig& config = {});

std::string autok_report_to_json(const AutoKReport& report, Linkage linkage);

std::string to_string(LocalMaxRule rule);
LocalMaxRule parse_local_max_rule(const std::string& name);

}  // namespace fmcl
