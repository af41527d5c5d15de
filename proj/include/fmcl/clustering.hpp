#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "fmcl/distance.hpp"

namespace fmcl {

enum class Linkage { single, complete, average };

struct StopAtThreshold {
    double theta = 0.0;
};
struct StopAtK {
    std::size_t k = 1;
};
using StopRule = std::variant<StopAtThreshold, StopAtK>;

struct Merge {
    /// Clusters are named by their smallest member index.
    std::size_t cluster_a = 0;
    std::size_t cluster_b = 0;
    double distance = 0.0;

    friend bool operator==(const Merge&, const Merge&) = default;
};

/// Flat partition of clients. Cluster ids are contiguous and numbered in
/// order of each cluster's smallest member.
struct ClusterAssignment {
    std::vector<int> labels;
    std::size_t num_clusters = 0;
    std::vector<Merge> merge_log;

    std::vector<std::vector<std::size_t>> members() const;
    friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

/// Cluster-to-cluster linkage computed from the original matrix. Average
/// linkage sums cross pairs in ascending (i, j) order.
double linkage_distance(const DistanceMatrix& d, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b, Linkage linkage);

/// Agglomerative clustering from singletons. Each step merges the pair with
/// the smallest linkage distance; exact ties go to the lexicographically
/// smallest (min member, min member) pair. Threshold mode stops before a
/// merge whose distance exceeds theta; fixed-K mode stops at k clusters.
ClusterAssignment agglomerate(const DistanceMatrix& d, Linkage linkage, const StopRule& stop);

/// Assignment from raw labels (relabelled to contiguous ids by first member).
ClusterAssignment assignment_from_labels(const std::vector<int>& labels);

/// Per-client silhouette values. Singletons get 0; a(i) and b(i) both zero gives 0.
std::vector<double> silhouette_samples(const DistanceMatrix& d, const ClusterAssignment& assignment);

/// Mean silhouette. Returns the sentinel -1 for a single cluster and 0 when
/// every client is a singleton.
double silhouette_score(const DistanceMatrix& d, const ClusterAssignment& assignment);

inline constexpr double kSingleClusterSilhouette = -1.0;

std::string assignment_to_json(const ClusterAssignment& assignment, Linkage linkage, const StopRule& stop);
ClusterAssignment assignment_from_json(const std::string& text);

std::string to_string(Linkage linkage);
Linkage parse_linkage(const std::string& name);

}  // namespace fmcl
