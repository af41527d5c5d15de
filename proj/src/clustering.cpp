#include "fmcl/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace fmcl {

std::vector<std::vector<std::size_t>> ClusterAssignment::members() const
{
    std::vector<std::vector<std::size_t>> out(num_clusters);
    for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
    return out;
}

double linkage_distance(const DistanceMatrix& d, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b, Linkage linkage)
{
    switch (linkage) {
    case Linkage::single: {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i : a)
            for (std::size_t j : b) best = std::min(best, d(i, j));
        return best;
    }
    case Linkage::complete: {
        double worst = 0.0;
        for (std::size_t i : a)
            for (std::size_t j : b) worst = std::max(worst, d(i, j));
        return worst;
    }
    case Linkage::average: {
        const auto& lo = a.front() < b.front() ? a : b;
        const auto& hi = a.front() < b.front() ? b : a;
        double total = 0.0;
        for (std::size_t i : lo)
            for (std::size_t j : hi) total += d(i, j);
        return total / static_cast<double>(a.size() * b.size());
    }
    }
    return 0.0;
}

ClusterAssignment assignment_from_labels(const std::vector<int>& labels)
{
    ClusterAssignment out;
    out.labels.resize(labels.size());
    std::map<int, int> remap;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
        out.labels[i] = it->second;
    }
    out.num_clusters = remap.size();
    return out;
}

ClusterAssignment agglomerate(const DistanceMatrix& d, Linkage linkage, const StopRule& stop)
{
    const std::size_t n = d.size();
    if (n == 0) throw std::invalid_argument("agglomerate: empty distance matrix");
    if (const auto* k = std::get_if<StopAtK>(&stop)) {
        if (k->k < 1 || k->k > n) {
            throw std::invalid_argument("agglomerate: K = " + std::to_string(k->k) + " outside [1, " +
                                        std::to_string(n) + "]");
        }
    } else if (const auto* t = std::get_if<StopAtThreshold>(&stop); !(t->theta >= 0.0)) {
        throw std::invalid_argument("agglomerate: threshold must be non-negative");
    }

    // Members are kept sorted, and clusters are kept sorted by smallest member,
    // so index order over `clusters` is the tie-breaking order.
    std::vector<std::vector<std::size_t>> clusters(n);
    for (std::size_t i = 0; i < n; ++i) clusters[i] = {i};

    // Cached linkage values, recomputed from the original matrix for every new cluster.
    std::vector<std::vector<double>> cache(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) cache[a][b] = linkage_distance(d, clusters[a], clusters[b], linkage);

    ClusterAssignment out;
    while (clusters.size() > 1) {
        if (const auto* k = std::get_if<StopAtK>(&stop); k && clusters.size() == k->k) break;

        std::size_t best_a = 0;
        std::size_t best_b = 1;
        double best = cache[0][1];
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                if (cache[a][b] < best) {
                    best = cache[a][b];
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (const auto* t = std::get_if<StopAtThreshold>(&stop); t && best > t->theta) break;

        out.merge_log.push_back(Merge{clusters[best_a].front(), clusters[best_b].front(), best});
        auto merged = clusters[best_a];
        merged.insert(merged.end(), clusters[best_b].begin(), clusters[best_b].end());
        std::sort(merged.begin(), merged.end());

        // best_a < best_b and merged.front() == clusters[best_a].front(), so
        // the merged cluster keeps slot best_a and the ordering stays valid.
        clusters[best_a] = std::move(merged);
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
        cache.erase(cache.begin() + static_cast<std::ptrdiff_t>(best_b));
        for (auto& row : cache) row.erase(row.begin() + static_cast<std::ptrdiff_t>(best_b));
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (c == best_a) continue;
            const double v = linkage_distance(d, clusters[std::min(c, best_a)], clusters[std::max(c, best_a)], linkage);
            cache[std::min(c, best_a)][std::max(c, best_a)] = v;
        }
    }

    out.labels.assign(n, 0);
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (std::size_t i : clusters[c]) out.labels[i] = static_cast<int>(c);
    out.num_clusters = clusters.size();
    return out;
}

std::vector<double> silhouette_samples(const DistanceMatrix& d, const ClusterAssignment& assignment)
{
    const std::size_t n = d.size();
    if (assignment.labels.size() != n) throw std::invalid_argument("silhouette: assignment size mismatch");
    const auto groups = assignment.members();
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(assignment.labels[i]);
        if (groups[own].size() <= 1) continue;
        double intra = 0.0;
        for (std::size_t j : groups[own])
            if (j != i) intra += d(i, j);
        const double a = intra / static_cast<double>(groups[own].size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (g == own || groups[g].empty()) continue;
            double total = 0.0;
            for (std::size_t j : groups[g]) total += d(i, j);
            b = std::min(b, total / static_cast<double>(groups[g].size()));
        }
        if (!std::isfinite(b)) continue;
        const double denom = std::max(a, b);
        s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return s;
}

double silhouette_score(const DistanceMatrix& d, const ClusterAssignment& assignment)
{
    if (assignment.num_clusters <= 1) return kSingleClusterSilhouette;
    const auto s = silhouette_samples(d, assignment);
    double total = 0.0;
    for (double v : s) total += v;
    return total / static_cast<double>(s.size());
}

std::string to_string(Linkage linkage)
{
    switch (linkage) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    }
    return "average";
}

Linkage parse_linkage(const std::string& name)
{
    if (name == "single") return Linkage::single;
    if (name == "complete") return Linkage::complete;
    if (name == "average") return Linkage::average;
    throw std::invalid_argument("unknown linkage '" + name + "'");
}

std::string assignment_to_json(const ClusterAssignment& assignment, Linkage linkage, const StopRule& stop)
{
    nlohmann::ordered_json doc;
    doc["num_clusters"] = assignment.num_clusters;
    doc["labels"] = assignment.labels;
    doc["linkage"] = to_string(linkage);
    if (const auto* k = std::get_if<StopAtK>(&stop)) {
        doc["stop"] = {{"rule", "fixed_k"}, {"k", k->k}};
    } else {
        doc["stop"] = {{"rule", "threshold"}, {"theta", std::get<StopAtThreshold>(stop).theta}};
    }
    auto log = nlohmann::ordered_json::array();
    for (const auto& m : assignment.merge_log) {
        log.push_back({{"cluster_a", m.cluster_a}, {"cluster_b", m.cluster_b}, {"distance", m.distance}});
    }
    doc["merge_log"] = std::move(log);
    return doc.dump(2) + "\n";
}

ClusterAssignment assignment_from_json(const std::string& text)
{
    const auto doc = nlohmann::json::parse(text);
    auto out = assignment_from_labels(doc.at("labels").get<std::vector<int>>());
    if (doc.contains("merge_log")) {
        for (const auto& m : doc.at("merge_log")) {
            out.merge_log.push_back(Merge{m.at("cluster_a").get<std::size_t>(), m.at("cluster_b").get<std::size_t>(),
                                          m.at("distance").get<double>()});
        }
    }
    return out;
}

}  // namespace fmcl
