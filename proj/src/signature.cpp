#include "fmcl/signature.hpp"

#include <stdexcept>

#include <json.hpp>

#include "fmcl/linalg.hpp"

namespace fmcl {

namespace {

ClassPrototype mean_of(const EmbeddingDataset& data, const std::vector<std::size_t>& rows, std::size_t total)
{
    std::vector<CompensatedSum> acc(data.dim());
    for (std::size_t i : rows) {
        const auto v = data.vector(i);
        for (std::size_t d = 0; d < v.size(); ++d) acc[d].add(v[d]);
    }
    ClassPrototype proto;
    proto.count = rows.size();
    proto.weight = static_cast<double>(rows.size()) / static_cast<double>(total);
    proto.mu.resize(data.dim());
    for (std::size_t d = 0; d < data.dim(); ++d) proto.mu[d] = acc[d].value() / static_cast<double>(rows.size());
    return proto;
}

}  // namespace

ClientSignature build_signature(const EmbeddingDataset& train, std::size_t client_id)
{
    if (train.empty()) {
        throw std::invalid_argument("signature: client " + std::to_string(client_id) + " has no training samples");
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < train.size(); ++i) by_class[train.label(i)].push_back(i);

    ClientSignature sig{client_id, train.dim(), train.size(), {}};
    for (const auto& [label, rows] : by_class) sig.entries.emplace(label, mean_of(train, rows, train.size()));
    return sig;
}

ClientSignature build_global_mean_signature(const EmbeddingDataset& train, std::size_t client_id)
{
    if (train.empty()) {
        throw std::invalid_argument("signature: client " + std::to_string(client_id) + " has no training samples");
    }
    std::vector<std::size_t> rows(train.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    ClientSignature sig{client_id, train.dim(), train.size(), {}};
    sig.entries.emplace(kPooledClass, mean_of(train, rows, train.size()));
    return sig;
}

ClientSignature build_signature(const EmbeddingDataset& train, std::size_t client_id, SignatureMode mode)
{
    return mode == SignatureMode::class_aware ? build_signature(train, client_id)
                                              : build_global_mean_signature(train, client_id);
}

std::string signatures_to_json(const std::vector<ClientSignature>& signatures)
{
    auto doc = nlohmann::ordered_json::array();
    for (const auto& sig : signatures) {
        nlohmann::ordered_json s;
        s["client_id"] = sig.client_id;
        s["dim"] = sig.dim;
        s["total_samples"] = sig.total_samples;
        auto entries = nlohmann::ordered_json::array();
        for (const auto& [label, proto] : sig.entries) {
            nlohmann::ordered_json e;
            e["class"] = label;
            e["count"] = proto.count;
            e["weight"] = proto.weight;
            e["mu"] = proto.mu;
            entries.push_back(std::move(e));
        }
        s["entries"] = std::move(entries);
        doc.push_back(std::move(s));
    }
    return doc.dump(2) + "\n";
}

std::vector<ClientSignature> signatures_from_json(const std::string& text)
{
    const auto doc = nlohmann::json::parse(text);
    std::vector<ClientSignature> out;
    for (const auto& s : doc) {
        ClientSignature sig;
        sig.client_id = s.at("client_id").get<std::size_t>();
        sig.dim = s.at("dim").get<std::size_t>();
        sig.total_samples = s.at("total_samples").get<std::size_t>();
        for (const auto& e : s.at("entries")) {
            ClassPrototype proto;
            proto.count = e.at("count").get<std::size_t>();
            proto.weight = e.at("weight").get<double>();
            proto.mu = e.at("mu").get<std::vector<double>>();
            if (proto.mu.size() != sig.dim) {
                throw std::runtime_error("signatures: client " + std::to_string(sig.client_id) +
                                         " has a prototype of the wrong dimension");
            }
            sig.entries.emplace(e.at("class").get<int>(), std::move(proto));
        }
        if (sig.entries.empty()) {
            throw std::runtime_error("signatures: client " + std::to_string(sig.client_id) + " has no entries");
        }
        out.push_back(std::move(sig));
    }
    return out;
}

std::string to_string(SignatureMode mode)
{
    return mode == SignatureMode::class_aware ? "class_aware" : "global_mean";
}

SignatureMode parse_signature_mode(const std::string& name)
{
    if (name == "class_aware") return SignatureMode::class_aware;
    if (name == "global_mean") return SignatureMode::global_mean;
    throw std::invalid_argument("unknown signature mode '" + name + "'");
}

}  // namespace fmcl
