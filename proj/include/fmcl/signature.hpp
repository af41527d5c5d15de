#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fmcl/dataset.hpp"

namespace fmcl {

/// Class id used by the pooled (label-agnostic) signature.
inline constexpr int kPooledClass = -1;

struct ClassPrototype {
    std::vector<double> mu;
    double weight = 0.0;
    std::size_t count = 0;

    friend bool operator==(const ClassPrototype&, const ClassPrototype&) = default;
};

/// Per-class prototype means with class-proportion weights. Weights are
/// count / total_samples, so they sum to one.
struct ClientSignature {
    std::size_t client_id = 0;
    std::size_t dim = 0;
    std::size_t total_samples = 0;
    std::map<int, ClassPrototype> entries;

    friend bool operator==(const ClientSignature&, const ClientSignature&) = default;
};

enum class SignatureMode { class_aware, global_mean };

/// Class-conditional signature: one prototype per class present in `train`.
/// Components are accumulated with compensated summation in sample order.
ClientSignature build_signature(const EmbeddingDataset& train, std::size_t client_id);

/// Single pooled prototype over all samples regardless of label (the
/// mean-embedding baseline), stored under kPooledClass with weight 1.
ClientSignature build_global_mean_signature(const EmbeddingDataset& train, std::size_t client_id);

ClientSignature build_signature(const EmbeddingDataset& train, std::size_t client_id, SignatureMode mode);

std::string signatures_to_json(const std::vector<ClientSignature>& signatures);
std::vector<ClientSignature> signatures_from_json(const std::string& text);

std::string to_string(SignatureMode mode);
SignatureMode parse_signature_mode(const std::string& name);

}  // namespace fmcl
