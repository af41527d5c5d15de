#include "fmcl/distance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fmcl/linalg.hpp"

namespace fmcl {

void DistanceParams::validate() const
{
    if (!(alpha > 0.0)) throw std::invalid_argument("distance: alpha must be positive");
    if (!(beta >= 1.0)) throw std::invalid_argument("distance: beta must be at least 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("distance: epsilon must lie in (0, 1)");
}

DistanceMatrix::DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values))
{
    if (values_.size() != n * n) throw std::invalid_argument("DistanceMatrix: expected n*n values");
    for (std::size_t i = 0; i < n; ++i) {
        if ((*this)(i, i) != 0.0) throw std::invalid_argument("DistanceMatrix: non-zero diagonal at " + std::to_string(i));
        for (std::size_t j = 0; j < n; ++j) {
            const double v = (*this)(i, j);
            if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("DistanceMatrix: entries must be finite and >= 0");
            if (v != (*this)(j, i)) throw std::invalid_argument("DistanceMatrix: not symmetric");
        }
    }
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double value)
{
    values_[i * n_ + j] = value;
    values_[j * n_ + i] = value;
}

std::vector<double> DistanceMatrix::off_diagonal() const
{
    std::vector<double> out;
    out.reserve(n_ * (n_ > 0 ? n_ - 1 : 0));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            if (i != j) out.push_back((*this)(i, j));
        }
    }
    return out;
}

std::optional<PairTerms> pair_terms(const ClientSignature& a, const ClientSignature& b, const DistanceParams& params)
{
    if (a.dim != b.dim) throw std::invalid_argument("distance: signatures differ in dimension");
    PairTerms t;
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    // Both maps are ordered by class id; walk the intersection.
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            const double w = std::min(ia->second.weight, ib->second.weight);
            const double d_cos = 1.0 - cosine_similarity(ia->second.mu, ib->second.mu, params.epsilon);
            t.overlap += w;
            t.weighted_cos += w * d_cos;
            ++t.shared_classes;
            ++ia;
            ++ib;
        }
    }
    if (t.shared_classes == 0) return std::nullopt;

    t.capped = t.weighted_cos / (t.overlap + params.epsilon);
    t.multiplier = params.overlap_scaling
                       ? std::min(std::pow(std::max(t.overlap, params.epsilon), -params.alpha), params.beta)
                       : 1.0;
    t.distance = t.capped * t.multiplier;
    return t;
}

std::optional<double> pairwise_class_distance(const ClientSignature& a, const ClientSignature& b,
                                              const DistanceParams& params)
{
    const auto t = pair_terms(a, b, params);
    if (!t) return std::nullopt;
    return t->distance;
}

DistanceBuild build_distance_matrix(const std::vector<ClientSignature>& signatures, const DistanceParams& params,
                                    unsigned threads)
{
    params.validate();
    const std::size_t n = signatures.size();
    if (n < 2) throw std::invalid_argument("distance: need at least two signatures");
    for (const auto& s : signatures) {
        if (s.dim != signatures.front().dim) throw std::invalid_argument("distance: signatures differ in dimension");
    }

    // Upper-triangle pairs in row-major order; each slot is written by exactly one task.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    std::vector<std::optional<double>> raw(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        raw[k] = pairwise_class_distance(signatures[pairs[k].first], signatures[pairs[k].second], params);
    });

    DistanceBuild out;
    out.matrix = DistanceMatrix(n);
    std::vector<double> finite;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (!raw[k]) {
            ++out.disjoint_pairs;
            continue;
        }
        const double v = *raw[k];
        out.matrix.set(pairs[k].first, pairs[k].second, v);
        finite.push_back(v);
        finite.push_back(v);
    }

    if (finite.empty()) {
        out.d_big = 2.0 * params.beta;
    } else {
        out.p95 = percentile(finite, 95.0);
        out.p99 = percentile(finite, 99.0);
        out.d_big = std::min(2.0 * *out.p95, *out.p99);
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (!raw[k]) out.matrix.set(pairs[k].first, pairs[k].second, out.d_big);
    }
    return out;
}

std::string matrix_to_csv(const DistanceMatrix& matrix)
{
    std::string out;
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        for (std::size_t j = 0; j < matrix.size(); ++j) {
            if (j > 0) out += ',';
            out += format_double(matrix(i, j));
        }
        out += '\n';
    }
    return out;
}

DistanceMatrix matrix_from_csv(const std::string& text)
{
    std::vector<double> values;
    std::size_t rows = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) values.push_back(std::stod(field));
        ++rows;
    }
    if (rows * rows != values.size()) throw std::runtime_error("distance csv: matrix is not square");
    return DistanceMatrix(rows, std::move(values));
}

std::string distance_build_to_json(const DistanceBuild& build, const DistanceParams& params)
{
    nlohmann::ordered_json doc;
    doc["n"] = build.matrix.size();
    doc["params"] = {{"alpha", params.alpha},
                     {"beta", params.beta},
                     {"epsilon", params.epsilon},
                     {"overlap_scaling", params.overlap_scaling}};
    doc["d_big"] = build.d_big;
    doc["p95"] = build.p95 ? nlohmann::ordered_json(*build.p95) : nlohmann::ordered_json(nullptr);
    doc["p99"] = build.p99 ? nlohmann::ordered_json(*build.p99) : nlohmann::ordered_json(nullptr);
    doc["disjoint_pairs"] = build.disjoint_pairs;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < build.matrix.size(); ++i) {
        std::vector<double> row(build.matrix.size());
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = build.matrix(i, j);
        rows.push_back(row);
    }
    doc["matrix"] = std::move(rows);
    return doc.dump(2) + "\n";
}

DistanceMatrix matrix_from_json(const std::string& text)
{
    const auto doc = nlohmann::json::parse(text);
    const auto& rows = doc.contains("matrix") ? doc.at("matrix") : doc;
    const std::size_t n = rows.size();
    std::vector<double> values;
    values.reserve(n * n);
    for (const auto& row : rows) {
        if (row.size() != n) throw std::runtime_error("distance json: matrix is not square");
        for (const auto& v : row) values.push_back(v.get<double>());
    }
    return DistanceMatrix(n, std::move(values));
}

}  // namespace fmcl
