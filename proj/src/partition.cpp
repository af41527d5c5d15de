#include "fmcl/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "fmcl/rng.hpp"

namespace fmcl {

void PartitionSpec::validate() const
{
    if (num_clients == 0) throw std::invalid_argument("partition: num_clients must be at least 1");
    if (!(dirichlet_alpha > 0.0) || !std::isfinite(dirichlet_alpha)) {
        throw std::invalid_argument("partition: dirichlet_alpha must be positive");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("partition: train_fraction must lie in (0, 1)");
    }
    if (max_attempts == 0) throw std::invalid_argument("partition: max_attempts must be positive");
}

std::vector<std::size_t> largest_remainder(const std::vector<double>& proportions, std::size_t total)
{
    const std::size_t n = proportions.size();
    std::vector<std::size_t> counts(n, 0);
    if (n == 0) return counts;
    std::vector<double> remainders(n, 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double exact = proportions[i] * static_cast<double>(total);
        const double whole = std::floor(exact);
        counts[i] = static_cast<std::size_t>(whole);
        remainders[i] = exact - whole;
        assigned += counts[i];
    }
    // Proportions summing to slightly above 1 can overshoot; trim from the smallest remainders.
    while (assigned > total) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[i] > 0 && (pick == n || remainders[i] < remainders[pick])) pick = i;
        }
        --counts[pick];
        remainders[pick] += 1.0;
        --assigned;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % n) {
        ++counts[order[k]];
        ++assigned;
    }
    return counts;
}

ClientIndices stratified_split(const EmbeddingDataset& data, const std::vector<std::size_t>& indices,
                               double train_fraction, std::uint64_t key)
{
    std::vector<std::vector<std::size_t>> by_class(data.num_classes());
    for (std::size_t i : indices) by_class[static_cast<std::size_t>(data.label(i))].push_back(i);

    ClientIndices out;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        if (rows.empty()) continue;
        SeededStream stream(key, "split", {c});
        stream.shuffle(rows);
        std::size_t n_train = rows.size();
        if (rows.size() >= 2) {
            const auto target = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
            n_train = std::clamp<std::size_t>(target, 1, rows.size() - 1);
        }
        out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.validation.insert(out.validation.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

std::vector<ClientShard> apply_manifest(const EmbeddingDataset& pool, const std::vector<ClientIndices>& manifest)
{
    std::vector<ClientShard> shards;
    shards.reserve(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        shards.push_back(ClientShard{i, pool.subset(manifest[i].train), pool.subset(manifest[i].validation)});
    }
    return shards;
}

Partition dirichlet_partition(const EmbeddingDataset& pool, const PartitionSpec& spec)
{
    spec.validate();
    if (pool.empty()) throw std::invalid_argument("partition: pool is empty");
    const std::size_t n = spec.num_clients;

    std::vector<std::vector<std::size_t>> class_rows(pool.num_classes());
    for (std::size_t i = 0; i < pool.size(); ++i) class_rows[static_cast<std::size_t>(pool.label(i))].push_back(i);

    Partition result;
    std::vector<std::vector<std::size_t>> assigned;
    bool satisfied = false;
    for (std::size_t attempt = 0; attempt < spec.max_attempts && !satisfied; ++attempt) {
        assigned.assign(n, {});
        for (std::size_t c = 0; c < class_rows.size(); ++c) {
            if (class_rows[c].empty()) continue;
            SeededStream stream(spec.seed, "partition", {attempt, c});
            const auto proportions = n == 1 ? std::vector<double>{1.0} : stream.dirichlet(n, spec.dirichlet_alpha);
            const auto counts = largest_remainder(proportions, class_rows[c].size());
            auto rows = class_rows[c];
            stream.shuffle(rows);
            std::size_t cursor = 0;
            for (std::size_t client = 0; client < n; ++client) {
                for (std::size_t k = 0; k < counts[client]; ++k) assigned[client].push_back(rows[cursor++]);
            }
        }
        result.attempts = attempt + 1;
        satisfied = std::all_of(assigned.begin(), assigned.end(),
                                [&](const auto& rows) { return rows.size() >= spec.min_samples_per_client; });
    }
    if (!satisfied) {
        throw std::runtime_error("partition: min_samples_per_client = " + std::to_string(spec.min_samples_per_client) +
                                 " unsatisfiable for " + std::to_string(n) + " clients after " +
                                 std::to_string(spec.max_attempts) + " Dirichlet draws");
    }

    result.manifest.reserve(n);
    for (std::size_t client = 0; client < n; ++client) {
        std::sort(assigned[client].begin(), assigned[client].end());
        const std::uint64_t key = derive_key(spec.seed, "client_split", {client});
        result.manifest.push_back(stratified_split(pool, assigned[client], spec.train_fraction, key));
    }
    result.shards = apply_manifest(pool, result.manifest);
    return result;
}

std::string manifest_to_json(const Partition& partition, const PartitionSpec& spec)
{
    nlohmann::ordered_json doc;
    doc["num_clients"] = spec.num_clients;
    doc["dirichlet_alpha"] = spec.dirichlet_alpha;
    doc["min_samples_per_client"] = spec.min_samples_per_client;
    doc["train_fraction"] = spec.train_fraction;
    doc["seed"] = spec.seed;
    doc["attempts"] = partition.attempts;
    auto clients = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < partition.manifest.size(); ++i) {
        nlohmann::ordered_json entry;
        entry["client_id"] = i;
        entry["train"] = partition.manifest[i].train;
        entry["validation"] = partition.manifest[i].validation;
        clients.push_back(std::move(entry));
    }
    doc["clients"] = std::move(clients);
    return doc.dump(2) + "\n";
}

std::vector<ClientIndices> manifest_from_json(const std::string& text)
{
    const auto doc = nlohmann::json::parse(text);
    std::vector<ClientIndices> manifest;
    for (const auto& entry : doc.at("clients")) {
        manifest.push_back(ClientIndices{entry.at("train").get<std::vector<std::size_t>>(),
                                         entry.at("validation").get<std::vector<std::size_t>>()});
    }
    return manifest;
}

}  // namespace fmcl
