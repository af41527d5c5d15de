#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fmcl {

using Vector = std::vector<double>;

/// Neumaier-compensated running sum. Accumulation order is the call order.
class CompensatedSum {
public:
    void add(double x) noexcept;
    [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values) noexcept;

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> v);
double squared_distance(std::span<const double> u, std::span<const double> v);

/// dot(u, v) / (|u| |v| + epsilon). Total on zero vectors whenever epsilon > 0.
double cosine_similarity(std::span<const double> u, std::span<const double> v, double epsilon);

/// Linear-interpolation percentile over the sorted values (the "inclusive"
/// estimator: rank h = (n - 1) p / 100, interpolated between floor and ceil).
/// Throws std::invalid_argument on an empty input or p outside [0, 100].
double percentile(std::span<const double> values, double p);

struct LossGrad {
    double loss = 0.0;
    Vector grad;
};

/// Cross-entropy of softmax(logits) against `label`, evaluated through
/// log-sum-exp. grad = softmax(logits) - onehot(label).
LossGrad softmax_xent_grad(std::span<const double> logits, std::size_t label);

/// Stable softmax, written into `out`.
void softmax(std::span<const double> logits, std::span<double> out);

/// Runs fn(i) for i in [0, n) on up to `threads` worker threads. Work is
/// statically chunked; callers must write results into per-index slots so
/// reductions can happen afterwards in index order.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace fmcl
