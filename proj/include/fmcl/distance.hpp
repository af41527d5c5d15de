#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fmcl/signature.hpp"

namespace fmcl {

struct DistanceParams {
    double alpha = 1.0;     ///< overlap exponent
    double beta = 100.0;    ///< cap on the overlap multiplier
    double epsilon = 1e-3;  ///< cosine denominator, weighted-mean denominator and overlap floor
    bool overlap_scaling = true;

    void validate() const;
};

/// Symmetric, zero-diagonal, non-negative client dissimilarities.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n);
    /// Row-major n x n values; throws unless symmetric with zero diagonal and finite non-negative entries.
    DistanceMatrix(std::size_t n, std::vector<double> values);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    /// Writes both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double value);
    const std::vector<double>& values() const noexcept { return values_; }

    /// Off-diagonal entries from both triangles, row-major.
    std::vector<double> off_diagonal() const;

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// Intermediate quantities of one client pair.
struct PairTerms {
    double overlap = 0.0;      ///< sum over shared classes of min(w_i, w_j)
    double weighted_cos = 0.0; ///< sum over shared classes of min(w_i, w_j) * d_cos
    double capped = 0.0;       ///< weighted_cos / (overlap + epsilon)
    double multiplier = 1.0;   ///< min(max(overlap, epsilon)^-alpha, beta), or 1 without scaling
    double distance = 0.0;     ///< capped * multiplier
    std::size_t shared_classes = 0;
};

/// Overlap-aware distance between two signatures; std::nullopt when the
/// clients share no class.
std::optional<PairTerms> pair_terms(const ClientSignature& a, const ClientSignature& b, const DistanceParams& params);
std::optional<double> pairwise_class_distance(const ClientSignature& a, const ClientSignature& b,
                                              const DistanceParams& params);

struct DistanceBuild {
    DistanceMatrix matrix;
    double d_big = 0.0;
    /// Percentiles of the finite off-diagonal values; absent when every pair is disjoint.
    std::optional<double> p95;
    std::optional<double> p99;
    std::size_t disjoint_pairs = 0;
};

/// Full matrix over all signatures. Disjoint pairs receive
/// D_big = min(2 P95, P99) of the finite off-diagonal values (both
/// triangles), or 2 * beta when no pair overlaps. Pairs are computed on up
/// to `threads` threads; the result does not depend on the thread count.
DistanceBuild build_distance_matrix(const std::vector<ClientSignature>& signatures, const DistanceParams& params,
                                    unsigned threads = 1);

std::string matrix_to_csv(const DistanceMatrix& matrix);
DistanceMatrix matrix_from_csv(const std::string& text);
std::string distance_build_to_json(const DistanceBuild& build, const DistanceParams& params);
/// Reads the "matrix" field of distance_build_to_json output.
DistanceMatrix matrix_from_json(const std::string& text);

}  // namespace fmcl
