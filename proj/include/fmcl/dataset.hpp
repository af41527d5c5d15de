#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fmcl {

/// Labelled embedding vectors, stored row-major. Every vector has `dim`
/// finite components and every label lies in [0, num_classes).
class EmbeddingDataset {
public:
    EmbeddingDataset(std::size_t dim, std::size_t num_classes);

    void add(std::span<const double> vector, int label);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }

    std::span<const double> vector(std::size_t i) const
    {
        return {values_.data() + i * dim_, dim_};
    }
    int label(std::size_t i) const { return labels_[i]; }
    const std::vector<int>& labels() const noexcept { return labels_; }

    /// Per-class sample counts, length num_classes.
    std::vector<std::size_t> class_counts() const;

    /// Dataset made of the given rows in the given order.
    EmbeddingDataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const EmbeddingDataset&, const EmbeddingDataset&) = default;

private:
    std::size_t dim_;
    std::size_t num_classes_;
    std::vector<double> values_;
    std::vector<int> labels_;
};

/// How class labels map onto prototype regions across latent clusters.
enum class LabelLayout {
    /// Every (cluster, class) pair gets its own prototype; labels are shared.
    distinct,
    /// Latent clusters share the class prototypes but cluster g relabels
    /// region r as class (r - g) mod C, so the same region carries a different
    /// label in each cluster.
    permuted,
    /// Region 0 is a common class (same prototype and label everywhere).
    /// Regions 1..C-1 are shared in feature space but carry labels private
    /// to each cluster: 1 + g (C - 1) + (r - 1). Clusters overlap in label
    /// space only through class 0.
    low_overlap,
    /// Every cluster owns its classes: cluster g uses labels g C .. g C + C - 1,
    /// each with its own prototype. No label is shared across clusters.
    disjoint,
};

struct SyntheticSpec {
    std::size_t num_latent_clusters = 3;
    std::size_t num_classes = 3;
    std::size_t dim = 16;
    std::size_t samples_per_class_per_cluster = 100;
    double class_mean_separation = 10.0;
    double within_class_stddev = 0.1;
    std::uint64_t seed = 0;
    LabelLayout layout = LabelLayout::distinct;

    void validate() const;
    /// Label count of the generated datasets (larger than num_classes for low_overlap and disjoint).
    std::size_t output_classes() const;
};

struct SyntheticData {
    /// One dataset per latent cluster.
    std::vector<EmbeddingDataset> clusters;
    /// Latent-cluster id of each entry of `clusters`.
    std::vector<int> ground_truth;
    /// prototypes[g][label] is the mean of class `label` in cluster g; rows
    /// for labels the cluster does not use are empty.
    std::vector<std::vector<std::vector<double>>> prototypes;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Text format: header "<num_samples> <dim> <num_classes>", then one row per
/// sample "<label> <v_1> ... <v_dim>" with shortest round-trip decimals.
EmbeddingDataset read_embeddings(const std::filesystem::path& path);
EmbeddingDataset parse_embeddings(const std::string& text);
void write_embeddings(const EmbeddingDataset& dataset, const std::filesystem::path& path);
std::string format_embeddings(const EmbeddingDataset& dataset);

/// Shortest decimal that parses back to exactly `x`.
std::string format_double(double x);

std::string to_string(LabelLayout layout);
LabelLayout parse_label_layout(const std::string& name);

}  // namespace fmcl
