#include "fmcl/flcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fmcl/linalg.hpp"
#include "fmcl/rng.hpp"

namespace fmcl {

void TrainConfig::validate() const
{
    if (rounds == 0) throw std::invalid_argument("train: rounds must be positive");
    if (local_epochs == 0) throw std::invalid_argument("train: local_epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("train: learning_rate must be non-negative");
    }
    if (!(participation > 0.0 && participation <= 1.0)) {
        throw std::invalid_argument("train: participation must lie in (0, 1]");
    }
    if (!(prox_mu >= 0.0)) throw std::invalid_argument("train: prox_mu must be non-negative");
}

ModelShape shape_for(const TrainConfig& config, std::size_t dim, std::size_t num_classes)
{
    return ModelShape{config.architecture, dim, num_classes, config.hidden};
}

ModelParams initial_params(const ModelShape& shape, std::uint64_t seed, std::size_t cluster_key)
{
    SeededStream stream(seed, "init", {cluster_key});
    return init_params(shape, stream);
}

ModelParams local_sgd(const ModelParams& params, const EmbeddingDataset& train, const TrainConfig& config,
                      const ModelParams* anchor, const LocalContext& context)
{
    check_shape(params, train);
    if (config.batch_size == 0) throw std::invalid_argument("local_sgd: batch_size must be positive");
    const bool proximal = anchor != nullptr && config.prox_mu > 0.0;
    if (proximal && anchor->values.size() != params.values.size()) {
        throw std::invalid_argument("local_sgd: anchor shape mismatch");
    }

    ModelParams theta = params;
    std::vector<double> grad(theta.values.size());
    std::vector<std::size_t> order(train.size());
    for (std::size_t epoch = 0; epoch < config.local_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        SeededStream stream(config.seed, "local_sgd", {context.client_id, context.round, epoch});
        stream.shuffle(order);
        std::size_t batch = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, end - start);
            double loss = batch_loss(theta, train, rows, grad);
            if (proximal) {
                double sq = 0.0;
                for (std::size_t k = 0; k < grad.size(); ++k) {
                    const double diff = theta.values[k] - anchor->values[k];
                    sq += diff * diff;
                    grad[k] += config.prox_mu * diff;
                }
                loss += 0.5 * config.prox_mu * sq;
            }
            const bool finite = std::isfinite(loss) &&
                                std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); });
            if (!finite) {
                throw std::runtime_error("local_sgd: non-finite loss or gradient at round " +
                                         std::to_string(context.round) + ", client " +
                                         std::to_string(context.client_id) + ", epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batch));
            }
            for (std::size_t k = 0; k < grad.size(); ++k) theta.values[k] -= config.learning_rate * grad[k];
        }
    }
    return theta;
}

ModelParams aggregate(std::span<const ClientUpdate> updates)
{
    if (updates.empty()) throw std::invalid_argument("aggregate: no client updates");
    const ModelParams& base = updates.front().params;
    CompensatedSum total_weight;
    for (const auto& u : updates) {
        if (u.params.shape != base.shape || u.params.values.size() != base.values.size()) {
            throw std::invalid_argument("aggregate: client parameter shapes differ");
        }
        if (!(u.weight > 0.0)) throw std::invalid_argument("aggregate: weights must be positive");
        total_weight.add(u.weight);
    }
    const double w_total = total_weight.value();

    ModelParams out = base;
    for (std::size_t k = 0; k < base.values.size(); ++k) {
        CompensatedSum acc;
        for (const auto& u : updates) acc.add((u.weight / w_total) * (u.params.values[k] - base.values[k]));
        out.values[k] = base.values[k] + acc.value();
    }
    return out;
}

MeanMetrics summarize(const std::vector<ClientEvaluation>& evaluations)
{
    MeanMetrics m;
    if (evaluations.empty()) return m;
    const double n = static_cast<double>(evaluations.size());
    double acc = 0.0, f1 = 0.0, loss = 0.0, auc = 0.0, weighted = 0.0, samples = 0.0;
    std::size_t auc_count = 0;
    for (const auto& e : evaluations) {
        acc += e.metrics.accuracy;
        f1 += e.metrics.macro_f1;
        loss += e.metrics.loss;
        weighted += e.metrics.accuracy * static_cast<double>(e.samples);
        samples += static_cast<double>(e.samples);
        if (e.metrics.macro_auc) {
            auc += *e.metrics.macro_auc;
            ++auc_count;
        }
    }
    m.accuracy = acc / n;
    m.macro_f1 = f1 / n;
    m.loss = loss / n;
    m.weighted_accuracy = weighted / samples;
    if (auc_count > 0) m.macro_auc = auc / static_cast<double>(auc_count);
    double acc_sq = 0.0, f1_sq = 0.0;
    for (const auto& e : evaluations) {
        acc_sq += (e.metrics.accuracy - m.accuracy) * (e.metrics.accuracy - m.accuracy);
        f1_sq += (e.metrics.macro_f1 - m.macro_f1) * (e.metrics.macro_f1 - m.macro_f1);
    }
    m.accuracy_std = std::sqrt(acc_sq / n);
    m.macro_f1_std = std::sqrt(f1_sq / n);
    return m;
}

FederationResult run_federation(const std::vector<ClientShard>& shards, const ClusterAssignment& assignment,
                                const TrainConfig& config, Strategy strategy)
{
    config.validate();
    if (shards.empty()) throw std::invalid_argument("federation: no clients");
    if (assignment.labels.size() != shards.size()) {
        throw std::invalid_argument("federation: assignment covers " + std::to_string(assignment.labels.size()) +
                                    " clients, expected " + std::to_string(shards.size()));
    }
    const std::size_t dim = shards.front().train.dim();
    const std::size_t classes = shards.front().train.num_classes();
    for (const auto& s : shards) {
        if (s.train.dim() != dim || s.train.num_classes() != classes) {
            throw std::invalid_argument("federation: clients disagree on dim or class count");
        }
    }

    const auto members = assignment.members();
    const auto shape = shape_for(config, dim, classes);
    FederationResult result;
    std::vector<std::size_t> cluster_keys;
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].empty()) throw std::invalid_argument("federation: cluster " + std::to_string(c) + " is empty");
        std::size_t samples = 0;
        std::size_t key = shards[members[c].front()].client_id;
        for (std::size_t i : members[c]) {
            samples += shards[i].train.size();
            key = std::min(key, shards[i].client_id);
        }
        if (samples == 0) {
            throw std::invalid_argument("federation: cluster " + std::to_string(c) + " has no training samples");
        }
        cluster_keys.push_back(key);
        result.models.push_back(initial_params(shape, config.seed, key));
        result.cluster_sizes.push_back(members[c].size());
    }

    const ModelParams* no_anchor = nullptr;
    for (std::size_t round = 1; round <= config.rounds; ++round) {
        // Participants per cluster in ascending position order.
        std::vector<std::vector<std::size_t>> chosen(members.size());
        for (std::size_t c = 0; c < members.size(); ++c) {
            std::vector<std::size_t> pool;
            for (std::size_t i : members[c]) {
                if (!shards[i].train.empty()) pool.push_back(i);
            }
            const auto m = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil(config.participation * static_cast<double>(pool.size()))));
            if (m < pool.size()) {
                SeededStream stream(config.seed, "participation", {cluster_keys[c], round});
                stream.shuffle(pool);
                pool.resize(m);
                std::sort(pool.begin(), pool.end());
            }
            chosen[c] = std::move(pool);
        }

        struct Task {
            std::size_t cluster;
            std::size_t shard;
        };
        std::vector<Task> tasks;
        for (std::size_t c = 0; c < chosen.size(); ++c)
            for (std::size_t i : chosen[c]) tasks.push_back({c, i});

        std::vector<ModelParams> updated(tasks.size());
        parallel_for(tasks.size(), config.threads, [&](std::size_t t) {
            const auto& task = tasks[t];
            const ModelParams& global = result.models[task.cluster];
            const ModelParams* anchor = strategy == Strategy::fedprox ? &global : no_anchor;
            updated[t] = local_sgd(global, shards[task.shard].train, config, anchor,
                                   LocalContext{round, shards[task.shard].client_id});
        });

        std::size_t cursor = 0;
        for (std::size_t c = 0; c < chosen.size(); ++c) {
            std::vector<ClientUpdate> updates;
            for (std::size_t i : chosen[c]) {
                updates.push_back(ClientUpdate{std::move(updated[cursor++]), static_cast<double>(shards[i].train.size())});
            }
            result.models[c] = aggregate(updates);
        }

        std::vector<std::size_t> evaluated;
        for (std::size_t i = 0; i < shards.size(); ++i) {
            if (!shards[i].validation.empty()) evaluated.push_back(i);
        }
        RoundRecord record;
        record.round = round;
        record.per_client.resize(evaluated.size());
        parallel_for(evaluated.size(), config.threads, [&](std::size_t e) {
            const std::size_t i = evaluated[e];
            const auto cluster = static_cast<std::size_t>(assignment.labels[i]);
            const auto& val = shards[i].validation;
            const auto proba = predict_proba(result.models[cluster], val);
            record.per_client[e] = ClientEvaluation{shards[i].client_id, cluster, val.size(),
                                                    evaluate(proba, val.labels(), val.num_classes())};
        });
        record.mean = summarize(record.per_client);
        record.mean_validation_loss = record.mean.loss;
        result.rounds.push_back(std::move(record));
    }
    return result;
}

std::string to_string(Strategy strategy)
{
    return strategy == Strategy::fedavg ? "fedavg" : "fedprox";
}

Strategy parse_strategy(const std::string& name)
{
    if (name == "fedavg") return Strategy::fedavg;
    if (name == "fedprox") return Strategy::fedprox;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

}  // namespace fmcl
