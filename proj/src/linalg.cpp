#include "fmcl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace fmcl {

void CompensatedSum::add(double x) noexcept
{
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double compensated_sum(std::span<const double> values) noexcept
{
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

double dot(std::span<const double> u, std::span<const double> v)
{
    if (u.size() != v.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
    return s;
}

double norm(std::span<const double> v)
{
    return std::sqrt(dot(v, v));
}

double squared_distance(std::span<const double> u, std::span<const double> v)
{
    if (u.size() != v.size()) throw std::invalid_argument("squared_distance: length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double d = u[k] - v[k];
        s += d * d;
    }
    return s;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v, double epsilon)
{
    if (u.size() != v.size()) throw std::invalid_argument("cosine_similarity: length mismatch");
    const double denom = norm(u) * norm(v) + epsilon;
    if (denom == 0.0) return 0.0;  // only reachable with epsilon == 0 and a zero vector
    return dot(u, v) / denom;
}

double percentile(std::span<const double> values, double p)
{
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile: p must lie in [0, 100]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void softmax(std::span<const double> logits, std::span<double> out)
{
    if (logits.size() != out.size()) throw std::invalid_argument("softmax: length mismatch");
    const double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = std::exp(logits[k] - mx);
        total += out[k];
    }
    for (double& o : out) o /= total;
}

LossGrad softmax_xent_grad(std::span<const double> logits, std::size_t label)
{
    if (logits.empty() || label >= logits.size()) {
        throw std::invalid_argument("softmax_xent_grad: label out of range");
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double z : logits) total += std::exp(z - mx);
    const double log_norm = mx + std::log(total);

    LossGrad out;
    out.loss = log_norm - logits[label];
    out.grad.resize(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out.grad[k] = std::exp(logits[k] - log_norm);
    }
    out.grad[label] -= 1.0;
    return out;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    // The lowest failing index wins so the reported error is schedule-independent.
    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (i < first_index) {
                        first_index = i;
                        first_error = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    pool.clear();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fmcl
