#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fmcl/clustering.hpp"
#include "fmcl/metrics.hpp"
#include "fmcl/model.hpp"
#include "fmcl/partition.hpp"

namespace fmcl {

enum class Strategy { fedavg, fedprox };

struct TrainConfig {
    std::size_t rounds = 100;
    std::size_t local_epochs = 1;
    std::size_t batch_size = 16;
    double learning_rate = 0.05;
    double participation = 1.0;
    /// Proximal coefficient used by fedprox; 0 disables the term.
    double prox_mu = 0.01;
    std::uint64_t seed = 0;
    Architecture architecture = Architecture::softmax_linear;
    std::size_t hidden = 32;
    /// Worker threads for client updates; results do not depend on it.
    unsigned threads = 1;

    void validate() const;
};

/// Where a local update happens; keys the shuffling stream and labels errors.
struct LocalContext {
    std::size_t round = 0;
    std::size_t client_id = 0;
};

/// E epochs of mini-batch SGD on mean cross-entropy. Batches come from a
/// seeded shuffle sliced contiguously (the last batch may be short). With an
/// anchor and prox_mu > 0 the loss gains (prox_mu / 2) |theta - anchor|^2.
/// Throws std::runtime_error naming round, epoch and batch on a non-finite loss or gradient.
ModelParams local_sgd(const ModelParams& params, const EmbeddingDataset& train, const TrainConfig& config,
                      const ModelParams* anchor, const LocalContext& context);

struct ClientUpdate {
    ModelParams params;
    double weight = 0.0;
};

/// Sample-weighted mean of client parameters, reduced in the given order.
/// Computed as theta_0 + sum_i (w_i / W)(theta_i - theta_0) with compensated
/// sums, so identical inputs come back bit-exact.
ModelParams aggregate(std::span<const ClientUpdate> updates);

struct ClientEvaluation {
    std::size_t client_id = 0;
    std::size_t cluster = 0;
    std::size_t samples = 0;
    MetricsReport metrics;
};

/// Unweighted means across evaluated clients (the headline numbers) plus a
/// sample-weighted accuracy.
struct MeanMetrics {
    double accuracy = 0.0;
    double accuracy_std = 0.0;
    double macro_f1 = 0.0;
    double macro_f1_std = 0.0;
    /// Mean over clients with a defined AUC; absent when none has one.
    std::optional<double> macro_auc;
    double loss = 0.0;
    double weighted_accuracy = 0.0;
};

struct RoundRecord {
    std::size_t round = 0;
    std::vector<ClientEvaluation> per_client;
    MeanMetrics mean;
    double mean_validation_loss = 0.0;
};

struct FederationResult {
    std::vector<RoundRecord> rounds;
    /// Final model of each cluster, indexed by cluster id.
    std::vector<ModelParams> models;
    std::vector<std::size_t> cluster_sizes;
};

MeanMetrics summarize(const std::vector<ClientEvaluation>& evaluations);

/// One-shot clustered federation: every cluster runs its own FedAvg/FedProx
/// rounds restricted to its members. Cluster models start from a
/// stream keyed by (seed, smallest member client id). Clients with an empty
/// validation split are trained but not evaluated.
FederationResult run_federation(const std::vector<ClientShard>& shards, const ClusterAssignment& assignment,
                                const TrainConfig& config, Strategy strategy);

ModelShape shape_for(const TrainConfig& config, std::size_t dim, std::size_t num_classes);
ModelParams initial_params(const ModelShape& shape, std::uint64_t seed, std::size_t cluster_key);

std::string to_string(Strategy strategy);
Strategy parse_strategy(const std::string& name);

}  // namespace fmcl
