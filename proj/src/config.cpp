#include "fmcl/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace fmcl {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object()) throw std::invalid_argument("config: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw std::invalid_argument("config: unknown key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out)
{
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

SyntheticSpec synthetic_from_json(const json& j)
{
    reject_unknown(j, {"num_latent_clusters", "num_classes", "dim", "samples_per_class_per_cluster",
                       "class_mean_separation", "within_class_stddev", "seed", "layout"},
                   "data.synthetic");
    SyntheticSpec s;
    read(j, "num_latent_clusters", s.num_latent_clusters);
    read(j, "num_classes", s.num_classes);
    read(j, "dim", s.dim);
    read(j, "samples_per_class_per_cluster", s.samples_per_class_per_cluster);
    read(j, "class_mean_separation", s.class_mean_separation);
    read(j, "within_class_stddev", s.within_class_stddev);
    read(j, "seed", s.seed);
    if (j.contains("layout")) s.layout = parse_label_layout(j.at("layout").get<std::string>());
    return s;
}

}  // namespace

void ExperimentConfig::validate() const
{
    switch (data.kind) {
    case DataSourceKind::synthetic: data.synthetic.validate(); break;
    case DataSourceKind::pool_file:
        if (data.pool_path.empty()) throw std::invalid_argument("config: pool path is empty");
        break;
    case DataSourceKind::client_files:
        if (data.client_paths.empty()) throw std::invalid_argument("config: no client files");
        break;
    }
    partition.validate();
    distance.validate();
    autok.validate();
    train.validate();
    if (clustering == ClusteringMode::fixed_k && k == 0) throw std::invalid_argument("config: k must be positive");
    if (clustering == ClusteringMode::threshold && !(threshold >= 0.0)) {
        throw std::invalid_argument("config: threshold must be non-negative");
    }
    if (seeds.empty()) throw std::invalid_argument("config: at least one seed is required");
    if (data.kind == DataSourceKind::synthetic && partition.num_clients < data.synthetic.num_latent_clusters) {
        throw std::invalid_argument("config: fewer clients than latent clusters");
    }
}

ExperimentConfig config_from_json(const json& doc)
{
    reject_unknown(doc, {"name", "data", "partition", "distance", "signature", "clustering", "strategy", "train",
                         "selection_metric", "seeds", "output_dir", "threads"},
                   "config");
    ExperimentConfig c;
    read(doc, "name", c.name);

    if (doc.contains("data")) {
        const auto& d = doc.at("data");
        reject_unknown(d, {"synthetic", "pool", "client_files"}, "data");
        if (d.size() != 1) throw std::invalid_argument("config: data must name exactly one source");
        if (d.contains("synthetic")) {
            c.data.kind = DataSourceKind::synthetic;
            c.data.synthetic = synthetic_from_json(d.at("synthetic"));
        } else if (d.contains("pool")) {
            c.data.kind = DataSourceKind::pool_file;
            c.data.pool_path = d.at("pool").get<std::string>();
        } else {
            c.data.kind = DataSourceKind::client_files;
            c.data.client_paths = d.at("client_files").get<std::vector<std::string>>();
        }
    }
    if (doc.contains("partition")) {
        const auto& p = doc.at("partition");
        reject_unknown(p, {"num_clients", "dirichlet_alpha", "min_samples_per_client", "train_fraction", "max_attempts"},
                       "partition");
        read(p, "num_clients", c.partition.num_clients);
        read(p, "dirichlet_alpha", c.partition.dirichlet_alpha);
        read(p, "min_samples_per_client", c.partition.min_samples_per_client);
        read(p, "train_fraction", c.partition.train_fraction);
        read(p, "max_attempts", c.partition.max_attempts);
    }
    if (doc.contains("distance")) {
        const auto& p = doc.at("distance");
        reject_unknown(p, {"alpha", "beta", "epsilon", "overlap_scaling"}, "distance");
        read(p, "alpha", c.distance.alpha);
        read(p, "beta", c.distance.beta);
        read(p, "epsilon", c.distance.epsilon);
        read(p, "overlap_scaling", c.distance.overlap_scaling);
    }
    if (doc.contains("signature")) c.signature_mode = parse_signature_mode(doc.at("signature").get<std::string>());
    if (doc.contains("clustering")) {
        const auto& p = doc.at("clustering");
        reject_unknown(p, {"mode", "linkage", "k", "threshold", "autok"}, "clustering");
        if (p.contains("mode")) c.clustering = parse_clustering_mode(p.at("mode").get<std::string>());
        if (p.contains("linkage")) c.linkage = parse_linkage(p.at("linkage").get<std::string>());
        read(p, "k", c.k);
        read(p, "threshold", c.threshold);
        if (p.contains("autok")) {
            const auto& a = p.at("autok");
            reject_unknown(a, {"k_max", "cv_low", "cv_high", "window_low", "window_mid", "window_high", "rule"},
                           "clustering.autok");
            read(a, "k_max", c.autok.k_max);
            read(a, "cv_low", c.autok.cv_low);
            read(a, "cv_high", c.autok.cv_high);
            read(a, "window_low", c.autok.window_low);
            read(a, "window_mid", c.autok.window_mid);
            read(a, "window_high", c.autok.window_high);
            if (a.contains("rule")) c.autok.rule = parse_local_max_rule(a.at("rule").get<std::string>());
        }
    }
    if (doc.contains("strategy")) c.strategy = parse_strategy(doc.at("strategy").get<std::string>());
    if (doc.contains("train")) {
        const auto& t = doc.at("train");
        reject_unknown(t, {"rounds", "local_epochs", "batch_size", "learning_rate", "participation", "prox_mu",
                           "architecture", "hidden", "threads"},
                       "train");
        read(t, "rounds", c.train.rounds);
        read(t, "local_epochs", c.train.local_epochs);
        read(t, "batch_size", c.train.batch_size);
        read(t, "learning_rate", c.train.learning_rate);
        read(t, "participation", c.train.participation);
        read(t, "prox_mu", c.train.prox_mu);
        if (t.contains("architecture")) c.train.architecture = parse_architecture(t.at("architecture").get<std::string>());
        read(t, "hidden", c.train.hidden);
        read(t, "threads", c.train.threads);
    }
    if (doc.contains("selection_metric")) {
        c.selection = parse_selection_metric(doc.at("selection_metric").get<std::string>());
    }
    read(doc, "seeds", c.seeds);
    read(doc, "output_dir", c.output_dir);
    read(doc, "threads", c.threads);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream file(path);
    if (!file) throw std::runtime_error("config: cannot open " + path);
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config: " + path + ": " + e.what());
    }
    return config_from_json(doc);
}

nlohmann::ordered_json data_source_to_json(const DataSource& data)
{
    nlohmann::ordered_json d;
    switch (data.kind) {
    case DataSourceKind::synthetic: {
        const auto& s = data.synthetic;
        d["synthetic"] = {{"num_latent_clusters", s.num_latent_clusters},
                          {"num_classes", s.num_classes},
                          {"dim", s.dim},
                          {"samples_per_class_per_cluster", s.samples_per_class_per_cluster},
                          {"class_mean_separation", s.class_mean_separation},
                          {"within_class_stddev", s.within_class_stddev},
                          {"seed", s.seed},
                          {"layout", to_string(s.layout)}};
        break;
    }
    case DataSourceKind::pool_file: d["pool"] = data.pool_path; break;
    case DataSourceKind::client_files: d["client_files"] = data.client_paths; break;
    }
    return d;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c)
{
    nlohmann::ordered_json doc;
    doc["name"] = c.name;
    doc["data"] = data_source_to_json(c.data);
    doc["partition"] = {{"num_clients", c.partition.num_clients},
                        {"dirichlet_alpha", c.partition.dirichlet_alpha},
                        {"min_samples_per_client", c.partition.min_samples_per_client},
                        {"train_fraction", c.partition.train_fraction},
                        {"max_attempts", c.partition.max_attempts}};
    doc["distance"] = {{"alpha", c.distance.alpha},
                       {"beta", c.distance.beta},
                       {"epsilon", c.distance.epsilon},
                       {"overlap_scaling", c.distance.overlap_scaling}};
    doc["signature"] = to_string(c.signature_mode);
    doc["clustering"] = {{"mode", to_string(c.clustering)},
                         {"linkage", to_string(c.linkage)},
                         {"k", c.k},
                         {"threshold", c.threshold},
                         {"autok",
                          {{"k_max", c.autok.k_max},
                           {"cv_low", c.autok.cv_low},
                           {"cv_high", c.autok.cv_high},
                           {"window_low", c.autok.window_low},
                           {"window_mid", c.autok.window_mid},
                           {"window_high", c.autok.window_high},
                           {"rule", to_string(c.autok.rule)}}}};
    doc["strategy"] = to_string(c.strategy);
    doc["train"] = {{"rounds", c.train.rounds},
                    {"local_epochs", c.train.local_epochs},
                    {"batch_size", c.train.batch_size},
                    {"learning_rate", c.train.learning_rate},
                    {"participation", c.train.participation},
                    {"prox_mu", c.train.prox_mu},
                    {"architecture", to_string(c.train.architecture)},
                    {"hidden", c.train.hidden}};
    doc["selection_metric"] = to_string(c.selection);
    doc["seeds"] = c.seeds;
    return doc;
}

std::string to_string(ClusteringMode mode)
{
    switch (mode) {
    case ClusteringMode::global: return "global";
    case ClusteringMode::fixed_k: return "fixed_k";
    case ClusteringMode::threshold: return "threshold";
    case ClusteringMode::auto_k: return "auto_k";
    }
    return "auto_k";
}

ClusteringMode parse_clustering_mode(const std::string& name)
{
    if (name == "global") return ClusteringMode::global;
    if (name == "fixed_k") return ClusteringMode::fixed_k;
    if (name == "threshold") return ClusteringMode::threshold;
    if (name == "auto_k") return ClusteringMode::auto_k;
    throw std::invalid_argument("unknown clustering mode '" + name + "'");
}

std::string to_string(SelectionMetric metric)
{
    return metric == SelectionMetric::accuracy ? "accuracy" : "loss";
}

SelectionMetric parse_selection_metric(const std::string& name)
{
    if (name == "accuracy") return SelectionMetric::accuracy;
    if (name == "loss") return SelectionMetric::loss;
    throw std::invalid_argument("unknown selection metric '" + name + "'");
}

}  // namespace fmcl
