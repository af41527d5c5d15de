#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fmcl/dataset.hpp"
#include "fmcl/rng.hpp"

namespace fmcl {

enum class Architecture {
    softmax_linear,  ///< logits = W x + b
    mlp,             ///< logits = W2 tanh(W1 x + b1) + b2
};

struct ModelShape {
    Architecture architecture = Architecture::softmax_linear;
    std::size_t dim = 0;
    std::size_t num_classes = 0;
    std::size_t hidden = 32;

    std::size_t parameter_count() const;
    friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Flat parameter vector. Layout for softmax_linear: W (C x d, row-major), b (C).
/// For mlp: W1 (H x d), b1 (H), W2 (C x H), b2 (C).
struct ModelParams {
    ModelShape shape;
    std::vector<double> values;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
ModelParams init_params(const ModelShape& shape, SeededStream& stream);

void check_shape(const ModelParams& params, const EmbeddingDataset& data);

/// Logits for one input.
void forward(const ModelParams& params, std::span<const double> x, std::span<double> logits);

/// Mean cross-entropy over `rows` of `data`; when `grad` is non-empty it
/// receives the gradient of that mean with respect to params.values.
double batch_loss(const ModelParams& params, const EmbeddingDataset& data, std::span<const std::size_t> rows,
                  std::span<double> grad = {});

/// Row-major class probabilities for every sample of `data`.
std::vector<double> predict_proba(const ModelParams& params, const EmbeddingDataset& data);

std::string to_string(Architecture architecture);
Architecture parse_architecture(const std::string& name);

}  // namespace fmcl
