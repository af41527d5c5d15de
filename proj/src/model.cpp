#include "fmcl/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fmcl/linalg.hpp"

namespace fmcl {

std::size_t ModelShape::parameter_count() const
{
    if (architecture == Architecture::softmax_linear) return num_classes * (dim + 1);
    return hidden * (dim + 1) + num_classes * (hidden + 1);
}

ModelParams init_params(const ModelShape& shape, SeededStream& stream)
{
    if (shape.dim == 0 || shape.num_classes == 0) throw std::invalid_argument("model: empty shape");
    if (shape.architecture == Architecture::mlp && shape.hidden == 0) {
        throw std::invalid_argument("model: mlp needs a positive hidden width");
    }
    ModelParams p{shape, std::vector<double>(shape.parameter_count(), 0.0)};
    auto fill = [&](std::size_t offset, std::size_t rows, std::size_t fan_in) {
        const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t k = 0; k < rows * fan_in; ++k) p.values[offset + k] = stream.uniform(-r, r);
    };
    if (shape.architecture == Architecture::softmax_linear) {
        fill(0, shape.num_classes, shape.dim);
    } else {
        fill(0, shape.hidden, shape.dim);
        fill(shape.hidden * (shape.dim + 1), shape.num_classes, shape.hidden);
    }
    return p;
}

void check_shape(const ModelParams& params, const EmbeddingDataset& data)
{
    if (params.values.size() != params.shape.parameter_count()) {
        throw std::invalid_argument("model: parameter vector does not match its shape");
    }
    if (params.shape.dim != data.dim() || params.shape.num_classes != data.num_classes()) {
        throw std::invalid_argument("model: shape (dim " + std::to_string(params.shape.dim) + ", classes " +
                                    std::to_string(params.shape.num_classes) + ") does not match data (dim " +
                                    std::to_string(data.dim()) + ", classes " + std::to_string(data.num_classes()) + ")");
    }
}

namespace {

// out = W x + b for W stored row-major (rows x cols) at `w`, followed by b.
void affine(const double* w, std::size_t rows, std::size_t cols, std::span<const double> x, std::span<double> out)
{
    const double* b = w + rows * cols;
    for (std::size_t r = 0; r < rows; ++r) {
        double s = b[r];
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
        out[r] = s;
    }
}

}  // namespace

void forward(const ModelParams& params, std::span<const double> x, std::span<double> logits)
{
    const auto& s = params.shape;
    if (s.architecture == Architecture::softmax_linear) {
        affine(params.values.data(), s.num_classes, s.dim, x, logits);
        return;
    }
    std::vector<double> h(s.hidden);
    affine(params.values.data(), s.hidden, s.dim, x, h);
    for (double& v : h) v = std::tanh(v);
    affine(params.values.data() + s.hidden * (s.dim + 1), s.num_classes, s.hidden, h, logits);
}

double batch_loss(const ModelParams& params, const EmbeddingDataset& data, std::span<const std::size_t> rows,
                  std::span<double> grad)
{
    const auto& s = params.shape;
    const bool want_grad = !grad.empty();
    if (want_grad) {
        if (grad.size() != params.values.size()) throw std::invalid_argument("model: gradient buffer size mismatch");
        std::fill(grad.begin(), grad.end(), 0.0);
    }
    if (rows.empty()) return 0.0;

    const double scale = 1.0 / static_cast<double>(rows.size());
    std::vector<double> logits(s.num_classes);
    std::vector<double> hidden(s.architecture == Architecture::mlp ? s.hidden : 0);
    std::vector<double> hidden_grad(hidden.size());
    double total = 0.0;
    for (std::size_t i : rows) {
        const auto x = data.vector(i);
        const auto y = static_cast<std::size_t>(data.label(i));
        if (s.architecture == Architecture::softmax_linear) {
            affine(params.values.data(), s.num_classes, s.dim, x, logits);
        } else {
            affine(params.values.data(), s.hidden, s.dim, x, hidden);
            for (double& v : hidden) v = std::tanh(v);
            affine(params.values.data() + s.hidden * (s.dim + 1), s.num_classes, s.hidden, hidden, logits);
        }
        const auto lg = softmax_xent_grad(logits, y);
        total += lg.loss;
        if (!want_grad) continue;

        if (s.architecture == Architecture::softmax_linear) {
            double* gw = grad.data();
            double* gb = gw + s.num_classes * s.dim;
            for (std::size_t c = 0; c < s.num_classes; ++c) {
                const double g = lg.grad[c] * scale;
                for (std::size_t d = 0; d < s.dim; ++d) gw[c * s.dim + d] += g * x[d];
                gb[c] += g;
            }
        } else {
            const std::size_t off2 = s.hidden * (s.dim + 1);
            const double* w2 = params.values.data() + off2;
            double* gw1 = grad.data();
            double* gb1 = gw1 + s.hidden * s.dim;
            double* gw2 = grad.data() + off2;
            double* gb2 = gw2 + s.num_classes * s.hidden;
            std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
            for (std::size_t c = 0; c < s.num_classes; ++c) {
                const double g = lg.grad[c] * scale;
                for (std::size_t h = 0; h < s.hidden; ++h) {
                    gw2[c * s.hidden + h] += g * hidden[h];
                    hidden_grad[h] += g * w2[c * s.hidden + h];
                }
                gb2[c] += g;
            }
            for (std::size_t h = 0; h < s.hidden; ++h) {
                const double pre = hidden_grad[h] * (1.0 - hidden[h] * hidden[h]);
                for (std::size_t d = 0; d < s.dim; ++d) gw1[h * s.dim + d] += pre * x[d];
                gb1[h] += pre;
            }
        }
    }
    return total * scale;
}

std::vector<double> predict_proba(const ModelParams& params, const EmbeddingDataset& data)
{
    check_shape(params, data);
    const std::size_t c = params.shape.num_classes;
    std::vector<double> out(data.size() * c);
    std::vector<double> logits(c);
    for (std::size_t i = 0; i < data.size(); ++i) {
        forward(params, data.vector(i), logits);
        softmax(logits, std::span<double>(out.data() + i * c, c));
    }
    return out;
}

std::string to_string(Architecture architecture)
{
    return architecture == Architecture::softmax_linear ? "softmax_linear" : "mlp";
}

Architecture parse_architecture(const std::string& name)
{
    if (name == "softmax_linear") return Architecture::softmax_linear;
    if (name == "mlp") return Architecture::mlp;
    throw std::invalid_argument("unknown architecture '" + name + "'");
}

}  // namespace fmcl
