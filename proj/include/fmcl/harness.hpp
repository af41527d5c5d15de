#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmcl/ari.hpp"
#include "fmcl/config.hpp"

namespace fmcl {

/// Error raised by a pipeline stage, tagged with the stage name and seed.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, std::optional<std::uint64_t> seed, const std::string& message);
    const std::string& stage() const noexcept { return stage_; }
    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

private:
    std::string stage_;
    std::optional<std::uint64_t> seed_;
};

/// Loaded data: a pool of rows plus, for synthetic sources, the latent
/// cluster block each row came from.
struct LoadedData {
    EmbeddingDataset pool{1, 1};
    /// Row ranges [offset, offset + size) per latent cluster or client file.
    std::vector<std::size_t> block_offsets;
    std::vector<std::size_t> block_sizes;
    bool has_ground_truth = false;
};

LoadedData load_data(const DataSource& source);

/// Client shards plus the replay manifest (indices into LoadedData::pool).
struct ClientSplit {
    std::vector<ClientShard> shards;
    std::vector<ClientIndices> manifest;
    /// Latent cluster per client when the data has ground truth.
    std::vector<int> ground_truth;
};

/// Synthetic data: client i belongs to latent cluster i mod K and each
/// cluster's block is Dirichlet-partitioned among its clients. Pool file:
/// one Dirichlet partition over all clients. Client files: one client per
/// file, split train/validation.
ClientSplit split_clients(const LoadedData& data, const ExperimentConfig& config, std::uint64_t seed);

std::string client_split_to_json(const ClientSplit& split, const ExperimentConfig& config, std::uint64_t seed);

struct SeedResult {
    std::uint64_t seed = 0;
    ClusterAssignment assignment;
    std::optional<AutoKReport> autok;
    std::optional<DistanceBuild> distances;
    std::optional<double> ari;
    std::vector<RoundRecord> rounds;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Cross-seed metrics at one round.
struct RoundSummary {
    std::size_t round = 0;
    MeanStd accuracy;
    MeanStd macro_f1;
    std::optional<MeanStd> macro_auc;
    MeanStd validation_loss;
};

struct ExperimentSummary {
    ExperimentConfig config;
    std::vector<SeedResult> seeds;
    std::vector<RoundSummary> per_round;
    std::size_t best_round = 0;
    RoundSummary best;
    /// Set when fewer than two seeds ran and every std is reported as 0.
    bool single_seed = false;
};

/// Clustering stage of one seed on prepared shards. Returns the assignment
/// (plus diagnostics) without training.
SeedResult cluster_clients(const ClientSplit& split, const ExperimentConfig& config, std::uint64_t seed);

/// Full pipeline for every seed: split, signatures, distances, one-shot
/// clustering, federated training. Writes artifacts under config.output_dir
/// when it is non-empty.
ExperimentSummary run_experiment(const ExperimentConfig& config);

std::string summary_to_json(const ExperimentSummary& summary);
std::string round_log_csv(const std::vector<RoundRecord>& rounds, const ClusterAssignment& assignment);

struct ComparisonRow {
    std::string name;
    MeanStd accuracy;
    MeanStd macro_f1;
    std::optional<MeanStd> macro_auc;
    std::size_t best_round = 0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;

    std::string to_csv() const;
    std::string to_text() const;
};

/// Runs every config and tabulates best-round metrics. Configs must share
/// their seed list and data source.
ComparisonTable compare_strategies(const std::vector<ExperimentConfig>& configs);
ComparisonTable comparison_from_summaries(const std::vector<ExperimentSummary>& summaries);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace fmcl
