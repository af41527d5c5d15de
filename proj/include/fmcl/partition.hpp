#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fmcl/dataset.hpp"

namespace fmcl {

struct PartitionSpec {
    std::size_t num_clients = 20;
    double dirichlet_alpha = 0.1;
    /// Every client must end up with at least this many samples.
    std::size_t min_samples_per_client = 2;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    /// Dirichlet redraws allowed before min_samples_per_client is declared unsatisfiable.
    std::size_t max_attempts = 100;

    void validate() const;
};

struct ClientShard {
    std::size_t client_id = 0;
    EmbeddingDataset train;
    EmbeddingDataset validation;

    std::size_t size() const noexcept { return train.size() + validation.size(); }
};

/// Pool row indices behind one client's shard, for exact replay.
struct ClientIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

struct Partition {
    std::vector<ClientShard> shards;
    std::vector<ClientIndices> manifest;
    /// Dirichlet draws consumed (1 when the first draw satisfied the minimum).
    std::size_t attempts = 0;
};

/// Label-skewed split of `pool` over spec.num_clients clients. For each class
/// a proportion vector ~ Dirichlet(alpha * 1_N) is drawn and rounded with the
/// largest-remainder method; draws repeat until every client holds at least
/// min_samples_per_client samples. Each client's samples are then split into
/// train/validation, stratified per class.
Partition dirichlet_partition(const EmbeddingDataset& pool, const PartitionSpec& spec);

/// Rebuilds shards from a manifest (replay path).
std::vector<ClientShard> apply_manifest(const EmbeddingDataset& pool, const std::vector<ClientIndices>& manifest);

/// Integer counts summing exactly to `total`, proportional to `proportions`.
/// Remainders are awarded largest first, lower index first on ties.
std::vector<std::size_t> largest_remainder(const std::vector<double>& proportions, std::size_t total);

/// Stratified per-class split of `indices` (rows of `data`); classes with a
/// single sample go to train.
ClientIndices stratified_split(const EmbeddingDataset& data, const std::vector<std::size_t>& indices,
                               double train_fraction, std::uint64_t key);

std::string manifest_to_json(const Partition& partition, const PartitionSpec& spec);
std::vector<ClientIndices> manifest_from_json(const std::string& text);

}  // namespace fmcl
