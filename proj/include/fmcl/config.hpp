#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmcl/autok.hpp"
#include "fmcl/clustering.hpp"
#include "fmcl/dataset.hpp"
#include "fmcl/distance.hpp"
#include "fmcl/flcore.hpp"
#include "fmcl/partition.hpp"
#include "fmcl/signature.hpp"

namespace fmcl {

enum class DataSourceKind { synthetic, pool_file, client_files };

struct DataSource {
    DataSourceKind kind = DataSourceKind::synthetic;
    SyntheticSpec synthetic;
    std::string pool_path;
    std::vector<std::string> client_paths;
};

enum class ClusteringMode {
    global,     ///< no clustering: one federation over every client
    fixed_k,
    threshold,
    auto_k,
};

enum class SelectionMetric { accuracy, loss };

/// Everything one experiment needs. Defaults follow the reference setup:
/// alpha = 1, beta = 100, epsilon = 1e-3, average linkage, CV thresholds
/// 0.35 / 0.70, 100 rounds of one local epoch at full participation,
/// Dirichlet alpha = 0.1, seeds 0..4.
struct ExperimentConfig {
    std::string name = "fmcl";
    DataSource data;
    PartitionSpec partition;
    DistanceParams distance;
    SignatureMode signature_mode = SignatureMode::class_aware;
    ClusteringMode clustering = ClusteringMode::auto_k;
    Linkage linkage = Linkage::average;
    std::size_t k = 3;
    double threshold = 0.5;
    AutoKConfig autok;
    Strategy strategy = Strategy::fedavg;
    TrainConfig train;
    SelectionMetric selection = SelectionMetric::accuracy;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::string output_dir;
    /// Seeds processed concurrently; outputs do not depend on it.
    unsigned threads = 1;

    void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
nlohmann::ordered_json data_source_to_json(const DataSource& data);

std::string to_string(ClusteringMode mode);
ClusteringMode parse_clustering_mode(const std::string& name);
std::string to_string(SelectionMetric metric);
SelectionMetric parse_selection_metric(const std::string& name);

}  // namespace fmcl
