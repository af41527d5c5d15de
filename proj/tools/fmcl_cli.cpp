// Command-line front end: every pipeline stage as a subcommand. All
// subcommands read the same experiment config and write deterministic
// artifacts under --out.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmcl/harness.hpp"

namespace {

using namespace fmcl;
namespace fs = std::filesystem;

struct CommonOptions {
    std::string config_path;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonOptions& opts)
{
    cmd->add_option("--config", opts.config_path, "Experiment config (JSON); defaults are used when omitted");
    cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "Seed to run (defaults to the first config seed)");
    cmd->add_option("--threads", opts.threads, "Worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
}

ExperimentConfig load(const CommonOptions& opts)
{
    try {
        ExperimentConfig config = opts.config_path.empty() ? ExperimentConfig{} : load_config(opts.config_path);
        if (opts.threads) {
            config.threads = *opts.threads;
            config.train.threads = *opts.threads;
        }
        config.validate();
        return config;
    } catch (const std::exception& e) {
        throw StageError("config", std::nullopt, e.what());
    }
}

std::uint64_t seed_of(const CommonOptions& opts, const ExperimentConfig& config)
{
    return opts.seed ? *opts.seed : config.seeds.front();
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

ClientSplit prepare(const ExperimentConfig& config, std::uint64_t seed)
{
    const auto data = in_stage("load", std::nullopt, [&] { return load_data(config.data); });
    return in_stage("partition", seed, [&] { return split_clients(data, config, seed); });
}

void write(const fs::path& path, const std::string& text)
{
    in_stage("output", std::nullopt, [&] { write_text(path, text); });
    std::cout << "wrote " << path.string() << "\n";
}

std::vector<ClientSignature> signatures_for(const ClientSplit& split, const ExperimentConfig& config,
                                            std::uint64_t seed)
{
    return in_stage("signatures", seed, [&] {
        std::vector<ClientSignature> sigs;
        for (const auto& shard : split.shards) {
            sigs.push_back(build_signature(shard.train, shard.client_id, config.signature_mode));
        }
        return sigs;
    });
}

void cmd_generate(const CommonOptions& opts)
{
    auto config = load(opts);
    if (config.data.kind != DataSourceKind::synthetic) {
        throw StageError("generate", std::nullopt, "config data source is not synthetic");
    }
    if (opts.seed) config.data.synthetic.seed = *opts.seed;
    const auto data = in_stage("generate", std::nullopt, [&] { return generate_synthetic(config.data.synthetic); });
    const fs::path out(opts.out);
    nlohmann::ordered_json index;
    index["synthetic"] = data_source_to_json(config.data)["synthetic"];
    auto files = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < data.clusters.size(); ++g) {
        const std::string name = "cluster_" + std::to_string(g) + ".txt";
        write(out / name, format_embeddings(data.clusters[g]));
        files.push_back({{"file", name}, {"latent_cluster", data.ground_truth[g]}, {"rows", data.clusters[g].size()}});
    }
    index["files"] = std::move(files);
    write(out / "synthetic.json", index.dump(2) + "\n");
}

void cmd_partition(const CommonOptions& opts)
{
    const auto config = load(opts);
    const auto seed = seed_of(opts, config);
    const auto split = prepare(config, seed);
    write(fs::path(opts.out) / "manifest.json", client_split_to_json(split, config, seed));
}

void cmd_signatures(const CommonOptions& opts)
{
    const auto config = load(opts);
    const auto seed = seed_of(opts, config);
    const auto sigs = signatures_for(prepare(config, seed), config, seed);
    write(fs::path(opts.out) / "signatures.json", signatures_to_json(sigs));
}

void cmd_distances(const CommonOptions& opts)
{
    const auto config = load(opts);
    const auto seed = seed_of(opts, config);
    const auto sigs = signatures_for(prepare(config, seed), config, seed);
    const auto build =
        in_stage("distances", seed, [&] { return build_distance_matrix(sigs, config.distance, config.train.threads); });
    write(fs::path(opts.out) / "distances.csv", matrix_to_csv(build.matrix));
    write(fs::path(opts.out) / "distances.json", distance_build_to_json(build, config.distance));
}

void cmd_cluster(const CommonOptions& opts, bool force_autok)
{
    auto config = load(opts);
    if (force_autok) config.clustering = ClusteringMode::auto_k;
    const auto seed = seed_of(opts, config);
    const auto split = prepare(config, seed);
    const auto result = cluster_clients(split, config, seed);
    const fs::path out(opts.out);
    if (force_autok) {
        write(out / "autok.json", autok_report_to_json(*result.autok, config.linkage));
        return;
    }
    StopRule stop = StopAtK{result.assignment.num_clusters};
    if (config.clustering == ClusteringMode::threshold) stop = StopAtThreshold{config.threshold};
    write(out / "assignment.json", assignment_to_json(result.assignment, config.linkage, stop));
    if (result.ari) std::cout << "ARI vs. latent clusters: " << format_double(*result.ari) << "\n";
}

void cmd_run(const CommonOptions& opts, bool single_seed)
{
    auto config = load(opts);
    if (single_seed || opts.seed) config.seeds = {seed_of(opts, config)};
    config.output_dir = opts.out;
    const auto summary = run_experiment(config);
    std::cout << "wrote " << (fs::path(opts.out) / "summary.json").string() << "\n";
    std::cout << comparison_from_summaries({summary}).to_text();
}

void cmd_compare(const CommonOptions& opts, const std::vector<std::string>& configs)
{
    std::vector<ExperimentSummary> summaries;
    std::vector<ExperimentConfig> loaded;
    for (const auto& path : configs) {
        CommonOptions one = opts;
        one.config_path = path;
        auto config = load(one);
        if (opts.seed) config.seeds = {*opts.seed};
        config.output_dir = (fs::path(opts.out) / config.name).string();
        loaded.push_back(std::move(config));
    }
    for (const auto& c : loaded) {
        if (c.seeds != loaded.front().seeds) {
            throw StageError("compare", std::nullopt, "config '" + c.name + "' uses a different seed list");
        }
        if (data_source_to_json(c.data) != data_source_to_json(loaded.front().data)) {
            throw StageError("compare", std::nullopt, "config '" + c.name + "' uses a different data source");
        }
    }
    for (const auto& c : loaded) summaries.push_back(run_experiment(c));
    const auto table = comparison_from_summaries(summaries);
    write(fs::path(opts.out) / "comparison.csv", table.to_csv());
    write(fs::path(opts.out) / "comparison.txt", table.to_text());
    std::cout << table.to_text();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Clustered federated learning over client embedding signatures"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::vector<std::string> compare_configs;
    struct Entry {
        const char* name;
        const char* help;
    };
    const Entry entries[] = {
        {"generate", "Write the synthetic latent-cluster datasets"},
        {"partition", "Split data into client shards and write the manifest"},
        {"signatures", "Build client signatures"},
        {"distances", "Build the client distance matrix"},
        {"cluster", "Cluster clients with the configured stop rule"},
        {"autok", "Run automatic K selection and write its report"},
        {"train", "Cluster and train for a single seed"},
        {"run", "Run the full experiment over every config seed"},
        {"compare", "Run several configs and tabulate best-round metrics"},
    };
    std::vector<CLI::App*> commands;
    for (const auto& e : entries) {
        auto* cmd = app.add_subcommand(e.name, e.help);
        add_common(cmd, opts);
        commands.push_back(cmd);
    }
    commands.back()->add_option("--configs", compare_configs, "Configs to compare (at least two)")->expected(2, -1);

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (name == "generate") cmd_generate(opts);
        else if (name == "partition") cmd_partition(opts);
        else if (name == "signatures") cmd_signatures(opts);
        else if (name == "distances") cmd_distances(opts);
        else if (name == "cluster") cmd_cluster(opts, false);
        else if (name == "autok") cmd_cluster(opts, true);
        else if (name == "train") cmd_run(opts, true);
        else if (name == "run") cmd_run(opts, false);
        else if (name == "compare") {
            if (compare_configs.empty() && !opts.config_path.empty()) compare_configs.push_back(opts.config_path);
            if (compare_configs.size() < 2) throw StageError("compare", std::nullopt, "need at least two --configs");
            cmd_compare(opts, compare_configs);
        }
    } catch (const StageError& e) {
        std::cerr << "fmcl " << name << ": error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fmcl " << name << ": error: [stage " << name << "] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
