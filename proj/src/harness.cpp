#include "fmcl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fmcl/linalg.hpp"
#include "fmcl/rng.hpp"

namespace fmcl {

namespace {

std::string stage_message(const std::string& stage, std::optional<std::uint64_t> seed, const std::string& message)
{
    std::string out = "[stage " + stage;
    if (seed) out += ", seed " + std::to_string(*seed);
    return out + "] " + message;
}

template <typename F>
auto in_stage(const std::string& stage, std::optional<std::uint64_t> seed, F&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, seed, e.what());
    }
}

MeanStd mean_std(const std::vector<double>& values)
{
    MeanStd out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    for (double v : values) out.mean += v;
    out.mean /= n;
    if (values.size() < 2) return out;
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / n);
    return out;
}

nlohmann::ordered_json mean_std_json(const MeanStd& m)
{
    return {{"mean", m.mean}, {"std", m.std}};
}

nlohmann::ordered_json optional_json(const std::optional<double>& v)
{
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace

StageError::StageError(std::string stage, std::optional<std::uint64_t> seed, const std::string& message)
    : std::runtime_error(stage_message(stage, seed, message)), stage_(std::move(stage)), seed_(seed)
{
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + path.string());
    file << text;
    if (!file) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    return buf.str();
}

LoadedData load_data(const DataSource& source)
{
    LoadedData out;
    auto append = [&](const EmbeddingDataset& block) {
        out.block_offsets.push_back(out.pool.size());
        out.block_sizes.push_back(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) out.pool.add(block.vector(i), block.label(i));
    };
    switch (source.kind) {
    case DataSourceKind::synthetic: {
        const auto synth = generate_synthetic(source.synthetic);
        out.pool = EmbeddingDataset(source.synthetic.dim, source.synthetic.output_classes());
        for (const auto& block : synth.clusters) append(block);
        out.has_ground_truth = true;
        break;
    }
    case DataSourceKind::pool_file: {
        auto pool = read_embeddings(source.pool_path);
        out.pool = EmbeddingDataset(pool.dim(), pool.num_classes());
        append(pool);
        break;
    }
    case DataSourceKind::client_files: {
        std::vector<EmbeddingDataset> blocks;
        for (const auto& p : source.client_paths) blocks.push_back(read_embeddings(p));
        for (const auto& b : blocks) {
            if (b.dim() != blocks.front().dim() || b.num_classes() != blocks.front().num_classes()) {
                throw std::invalid_argument("client files disagree on dim or class count");
            }
        }
        out.pool = EmbeddingDataset(blocks.front().dim(), blocks.front().num_classes());
        for (const auto& b : blocks) append(b);
        break;
    }
    }
    return out;
}

ClientSplit split_clients(const LoadedData& data, const ExperimentConfig& config, std::uint64_t seed)
{
    ClientSplit split;
    switch (config.data.kind) {
    case DataSourceKind::synthetic: {
        const std::size_t n = config.partition.num_clients;
        const std::size_t k = data.block_sizes.size();
        split.manifest.resize(n);
        split.ground_truth.resize(n);
        for (std::size_t g = 0; g < k; ++g) {
            std::vector<std::size_t> clients;
            for (std::size_t i = g; i < n; i += k) clients.push_back(i);
            std::vector<std::size_t> rows(data.block_sizes[g]);
            for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = data.block_offsets[g] + r;
            const auto block = data.pool.subset(rows);
            PartitionSpec spec = config.partition;
            spec.num_clients = clients.size();
            spec.seed = derive_key(seed, "partition", {g});
            const auto part = dirichlet_partition(block, spec);
            for (std::size_t local = 0; local < clients.size(); ++local) {
                auto& entry = split.manifest[clients[local]];
                for (std::size_t r : part.manifest[local].train) entry.train.push_back(data.block_offsets[g] + r);
                for (std::size_t r : part.manifest[local].validation) {
                    entry.validation.push_back(data.block_offsets[g] + r);
                }
                split.ground_truth[clients[local]] = static_cast<int>(g);
            }
        }
        break;
    }
    case DataSourceKind::pool_file: {
        PartitionSpec spec = config.partition;
        spec.seed = derive_key(seed, "partition", {0});
        split.manifest = dirichlet_partition(data.pool, spec).manifest;
        break;
    }
    case DataSourceKind::client_files: {
        for (std::size_t b = 0; b < data.block_sizes.size(); ++b) {
            std::vector<std::size_t> rows(data.block_sizes[b]);
            for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = data.block_offsets[b] + r;
            split.manifest.push_back(stratified_split(data.pool, rows, config.partition.train_fraction,
                                                      derive_key(seed, "client_split", {b})));
        }
        break;
    }
    }
    split.shards = apply_manifest(data.pool, split.manifest);
    return split;
}

std::string client_split_to_json(const ClientSplit& split, const ExperimentConfig& config, std::uint64_t seed)
{
    nlohmann::ordered_json doc;
    doc["seed"] = seed;
    doc["data"] = data_source_to_json(config.data);
    doc["num_clients"] = split.shards.size();
    doc["dirichlet_alpha"] = config.partition.dirichlet_alpha;
    doc["train_fraction"] = config.partition.train_fraction;
    if (!split.ground_truth.empty()) doc["ground_truth"] = split.ground_truth;
    auto clients = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < split.manifest.size(); ++i) {
        clients.push_back({{"client_id", i},
                           {"train", split.manifest[i].train},
                           {"validation", split.manifest[i].validation}});
    }
    doc["clients"] = std::move(clients);
    return doc.dump(2) + "\n";
}

SeedResult cluster_clients(const ClientSplit& split, const ExperimentConfig& config, std::uint64_t seed)
{
    SeedResult result;
    result.seed = seed;
    const std::size_t n = split.shards.size();
    if (config.clustering == ClusteringMode::global) {
        result.assignment = assignment_from_labels(std::vector<int>(n, 0));
    } else {
        const auto signatures = in_stage("signatures", seed, [&] {
            std::vector<ClientSignature> sigs;
            for (const auto& shard : split.shards) {
                sigs.push_back(build_signature(shard.train, shard.client_id, config.signature_mode));
            }
            return sigs;
        });
        result.distances = in_stage("distances", seed, [&] {
            return build_distance_matrix(signatures, config.distance, config.train.threads);
        });
        in_stage("clustering", seed, [&] {
            const auto& d = result.distances->matrix;
            switch (config.clustering) {
            case ClusteringMode::fixed_k:
                result.assignment = agglomerate(d, config.linkage, StopAtK{config.k});
                break;
            case ClusteringMode::threshold:
                result.assignment = agglomerate(d, config.linkage, StopAtThreshold{config.threshold});
                break;
            case ClusteringMode::auto_k:
                result.autok = select_k(d, config.linkage, config.autok);
                result.assignment = result.autok->assignment;
                break;
            case ClusteringMode::global: break;
            }
        });
    }
    if (!split.ground_truth.empty()) result.ari = adjusted_rand_index(result.assignment.labels, split.ground_truth);
    return result;
}

std::string round_log_csv(const std::vector<RoundRecord>& rounds, const ClusterAssignment& assignment)
{
    std::string sizes;
    for (const auto& m : assignment.members()) {
        if (!sizes.empty()) sizes += ';';
        sizes += std::to_string(m.size());
    }
    std::string out =
        "round,cluster_sizes,evaluated_clients,accuracy_mean,accuracy_std,macro_f1_mean,macro_f1_std,"
        "macro_auc_mean,validation_loss,weighted_accuracy\n";
    for (const auto& r : rounds) {
        out += std::to_string(r.round) + ',' + sizes + ',' + std::to_string(r.per_client.size()) + ',' +
               format_double(r.mean.accuracy) + ',' + format_double(r.mean.accuracy_std) + ',' +
               format_double(r.mean.macro_f1) + ',' + format_double(r.mean.macro_f1_std) + ',' +
               (r.mean.macro_auc ? format_double(*r.mean.macro_auc) : std::string("NA")) + ',' +
               format_double(r.mean_validation_loss) + ',' + format_double(r.mean.weighted_accuracy) + '\n';
    }
    return out;
}

namespace {

void write_seed_artifacts(const std::filesystem::path& dir, const ClientSplit& split, const SeedResult& result,
                          const ExperimentConfig& config)
{
    write_text(dir / "manifest.json", client_split_to_json(split, config, result.seed));
    if (result.distances) {
        write_text(dir / "distances.csv", matrix_to_csv(result.distances->matrix));
        write_text(dir / "distances.json", distance_build_to_json(*result.distances, config.distance));
    }
    StopRule stop = StopAtK{result.assignment.num_clusters};
    if (config.clustering == ClusteringMode::threshold) stop = StopAtThreshold{config.threshold};
    write_text(dir / "assignment.json", assignment_to_json(result.assignment, config.linkage, stop));
    if (result.autok) write_text(dir / "autok.json", autok_report_to_json(*result.autok, config.linkage));
    write_text(dir / "round_log.csv", round_log_csv(result.rounds, result.assignment));
}

std::vector<RoundSummary> summarize_rounds(const std::vector<SeedResult>& seeds)
{
    std::vector<RoundSummary> out;
    const std::size_t rounds = seeds.front().rounds.size();
    for (std::size_t r = 0; r < rounds; ++r) {
        std::vector<double> acc, f1, auc, loss;
        for (const auto& s : seeds) {
            const auto& rec = s.rounds[r];
            acc.push_back(rec.mean.accuracy);
            f1.push_back(rec.mean.macro_f1);
            loss.push_back(rec.mean_validation_loss);
            if (rec.mean.macro_auc) auc.push_back(*rec.mean.macro_auc);
        }
        RoundSummary summary;
        summary.round = seeds.front().rounds[r].round;
        summary.accuracy = mean_std(acc);
        summary.macro_f1 = mean_std(f1);
        summary.validation_loss = mean_std(loss);
        if (!auc.empty()) summary.macro_auc = mean_std(auc);
        out.push_back(summary);
    }
    return out;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config)
{
    in_stage("config", std::nullopt, [&] { config.validate(); });
    const auto data = in_stage("load", std::nullopt, [&] { return load_data(config.data); });

    ExperimentSummary summary;
    summary.config = config;
    summary.seeds.resize(config.seeds.size());
    parallel_for(config.seeds.size(), config.threads, [&](std::size_t s) {
        const std::uint64_t seed = config.seeds[s];
        const auto split = in_stage("partition", seed, [&] { return split_clients(data, config, seed); });
        auto result = cluster_clients(split, config, seed);
        in_stage("train", seed, [&] {
            TrainConfig train = config.train;
            train.seed = seed;
            result.rounds = run_federation(split.shards, result.assignment, train, config.strategy).rounds;
        });
        if (!config.output_dir.empty()) {
            in_stage("output", seed, [&] {
                write_seed_artifacts(std::filesystem::path(config.output_dir) / ("seed_" + std::to_string(seed)), split,
                                     result, config);
            });
        }
        summary.seeds[s] = std::move(result);
    });

    summary.per_round = summarize_rounds(summary.seeds);
    summary.single_seed = summary.seeds.size() < 2;
    std::size_t best = 0;
    for (std::size_t r = 1; r < summary.per_round.size(); ++r) {
        const auto& cand = summary.per_round[r];
        const auto& cur = summary.per_round[best];
        const bool better = config.selection == SelectionMetric::accuracy
                                ? cand.accuracy.mean > cur.accuracy.mean
                                : cand.validation_loss.mean < cur.validation_loss.mean;
        if (better) best = r;
    }
    summary.best = summary.per_round[best];
    summary.best_round = summary.best.round;

    if (!config.output_dir.empty()) {
        in_stage("output", std::nullopt, [&] {
            const std::filesystem::path dir(config.output_dir);
            write_text(dir / "config.json", config_to_json(config).dump(2) + "\n");
            write_text(dir / "summary.json", summary_to_json(summary));
        });
    }
    return summary;
}

std::string summary_to_json(const ExperimentSummary& summary)
{
    nlohmann::ordered_json doc;
    doc["config"] = config_to_json(summary.config);
    doc["headline"] = "unweighted mean over evaluated clients; mean and population std across seeds";
    doc["single_seed"] = summary.single_seed;
    doc["best_round"] = summary.best_round;
    auto round_json = [](const RoundSummary& r) {
        nlohmann::ordered_json j;
        j["round"] = r.round;
        j["accuracy"] = mean_std_json(r.accuracy);
        j["macro_f1"] = mean_std_json(r.macro_f1);
        j["macro_auc"] = r.macro_auc ? mean_std_json(*r.macro_auc) : nlohmann::ordered_json(nullptr);
        j["validation_loss"] = mean_std_json(r.validation_loss);
        return j;
    };
    doc["best"] = round_json(summary.best);

    auto seeds = nlohmann::ordered_json::array();
    for (const auto& s : summary.seeds) {
        nlohmann::ordered_json j;
        j["seed"] = s.seed;
        j["num_clusters"] = s.assignment.num_clusters;
        j["labels"] = s.assignment.labels;
        j["ari"] = optional_json(s.ari);
        if (s.autok) {
            j["autok"] = {{"cv", s.autok->cv},
                          {"window", s.autok->window},
                          {"selected_k", s.autok->selected_k},
                          {"used_fallback", s.autok->used_fallback}};
        }
        if (s.distances) j["d_big"] = s.distances->d_big;
        auto series = nlohmann::ordered_json::array();
        for (const auto& r : s.rounds) {
            series.push_back({{"round", r.round},
                              {"accuracy", r.mean.accuracy},
                              {"macro_f1", r.mean.macro_f1},
                              {"macro_auc", optional_json(r.mean.macro_auc)},
                              {"validation_loss", r.mean_validation_loss},
                              {"weighted_accuracy", r.mean.weighted_accuracy}});
        }
        j["series"] = std::move(series);
        seeds.push_back(std::move(j));
    }
    doc["seeds"] = std::move(seeds);

    auto per_round = nlohmann::ordered_json::array();
    for (const auto& r : summary.per_round) per_round.push_back(round_json(r));
    doc["per_round"] = std::move(per_round);
    return doc.dump(2) + "\n";
}

ComparisonTable comparison_from_summaries(const std::vector<ExperimentSummary>& summaries)
{
    ComparisonTable table;
    for (const auto& s : summaries) {
        table.rows.push_back(ComparisonRow{s.config.name, s.best.accuracy, s.best.macro_f1, s.best.macro_auc,
                                           s.best_round});
    }
    return table;
}

ComparisonTable compare_strategies(const std::vector<ExperimentConfig>& configs)
{
    if (configs.size() < 2) throw std::invalid_argument("compare: need at least two configs");
    const auto data = data_source_to_json(configs.front().data);
    for (const auto& c : configs) {
        if (c.seeds != configs.front().seeds) {
            throw std::invalid_argument("compare: config '" + c.name + "' uses a different seed list");
        }
        if (data_source_to_json(c.data) != data) {
            throw std::invalid_argument("compare: config '" + c.name + "' uses a different data source");
        }
    }
    std::vector<ExperimentSummary> summaries;
    for (const auto& c : configs) summaries.push_back(run_experiment(c));
    return comparison_from_summaries(summaries);
}

std::string ComparisonTable::to_csv() const
{
    std::string out = "strategy,accuracy_mean,accuracy_std,macro_f1_mean,macro_f1_std,macro_auc_mean,macro_auc_std,best_round\n";
    for (const auto& r : rows) {
        out += r.name + ',' + format_double(r.accuracy.mean) + ',' + format_double(r.accuracy.std) + ',' +
               format_double(r.macro_f1.mean) + ',' + format_double(r.macro_f1.std) + ',' +
               (r.macro_auc ? format_double(r.macro_auc->mean) : std::string("NA")) + ',' +
               (r.macro_auc ? format_double(r.macro_auc->std) : std::string("NA")) + ',' +
               std::to_string(r.best_round) + '\n';
    }
    return out;
}

std::string ComparisonTable::to_text() const
{
    auto cell = [](const MeanStd& m) { return fixed(100.0 * m.mean, 2) + " +- " + fixed(100.0 * m.std, 2); };
    std::vector<std::vector<std::string>> cells{{"Strategy", "Acc", "F1", "AUC", "Round"}};
    for (const auto& r : rows) {
        cells.push_back({r.name, cell(r.accuracy), cell(r.macro_f1), r.macro_auc ? cell(*r.macro_auc) : "NA",
                         std::to_string(r.best_round)});
    }
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            const auto pad = std::string(width[c] - row[c].size(), ' ');
            out += c == 0 ? row[c] + pad : "  " + pad + row[c];
        }
        out += '\n';
    }
    return out;
}

}  // namespace fmcl
