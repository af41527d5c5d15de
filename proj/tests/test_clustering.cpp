#include <doctest.h>

#include <cmath>
#include <random>

#include "fmcl/clustering.hpp"
#include "oracles.hpp"

using namespace fmcl;

namespace {

DistanceMatrix four_points()
{
    // a-b 0.1, c-d 0.2, every cross pair 1.0.
    return oracle::from_rows({{0, 0.1, 1, 1}, {0.1, 0, 1, 1}, {1, 1, 0, 0.2}, {1, 1, 0.2, 0}});
}

void check_against_oracle(const oracle::Matrix& rows, Linkage linkage, const StopRule& stop)
{
    const auto d = oracle::from_rows(rows);
    const auto got = agglomerate(d, linkage, stop);
    const auto* k = std::get_if<StopAtK>(&stop);
    const auto* t = std::get_if<StopAtThreshold>(&stop);
    const auto ref = oracle::agglomerate(rows, linkage, k ? std::optional(k->k) : std::nullopt,
                                         t ? std::optional(t->theta) : std::nullopt);
    CHECK(got.labels == ref.labels);
    REQUIRE(got.merge_log.size() == ref.merged.size());
    for (std::size_t m = 0; m < ref.merged.size(); ++m) {
        CHECK(got.merge_log[m].cluster_a == ref.merged[m].first);
        CHECK(got.merge_log[m].cluster_b == ref.merged[m].second);
        CHECK(std::abs(got.merge_log[m].distance - ref.heights[m]) <= 1e-12);
    }
}

}  // namespace

TEST_SUITE("clustering")
{
    TEST_CASE("fixed K extremes")
    {
        const auto d = four_points();
        const auto all = agglomerate(d, Linkage::average, StopAtK{4});
        CHECK(all.num_clusters == 4);
        CHECK(all.merge_log.empty());
        CHECK(all.labels == std::vector<int>{0, 1, 2, 3});
        const auto one = agglomerate(d, Linkage::average, StopAtK{1});
        CHECK(one.num_clusters == 1);
        CHECK(one.labels == std::vector<int>{0, 0, 0, 0});
        CHECK_THROWS(agglomerate(d, Linkage::average, StopAtK{0}));
        CHECK_THROWS(agglomerate(d, Linkage::average, StopAtK{5}));
        CHECK_THROWS(agglomerate(d, Linkage::average, StopAtThreshold{-1}));
    }

    TEST_CASE("two obvious pairs")
    {
        const auto res = agglomerate(four_points(), Linkage::average, StopAtK{2});
        CHECK(res.labels == std::vector<int>{0, 0, 1, 1});
        REQUIRE(res.merge_log.size() == 2);
        CHECK(res.merge_log[0] == Merge{0, 1, 0.1});
        CHECK(res.merge_log[1] == Merge{2, 3, 0.2});
        CHECK(res.members() == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}});
    }

    TEST_CASE("matches exhaustive reference on random matrices")
    {
        std::mt19937_64 gen(8);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t n = 2 + trial % 7;
            const auto rows = oracle::random_matrix(gen, n, trial % 2 == 0);
            for (Linkage l : {Linkage::single, Linkage::complete, Linkage::average}) {
                check_against_oracle(rows, l, StopAtK{1});
                check_against_oracle(rows, l, StopAtK{1 + static_cast<std::size_t>(gen() % n)});
                check_against_oracle(rows, l, StopAtThreshold{2.0});
            }
        }
    }

    TEST_CASE("threshold and fixed K agree")
    {
        std::mt19937_64 gen(19);
        for (int trial = 0; trial < 50; ++trial) {
            const auto d = oracle::from_rows(oracle::random_matrix(gen, 8, false));
            for (Linkage l : {Linkage::single, Linkage::complete, Linkage::average}) {
                const auto by_threshold = agglomerate(d, l, StopAtThreshold{4.0});
                const auto by_k = agglomerate(d, l, StopAtK{by_threshold.num_clusters});
                CHECK(by_threshold.labels == by_k.labels);
            }
        }
    }

    TEST_CASE("silhouette hand values")
    {
        // Two clusters, intra 0.1, inter 1.0: every s(i) = 0.9.
        oracle::Matrix rows(6, std::vector<double>(6, 0));
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j)
                if (i != j) rows[i][j] = (i < 3) == (j < 3) ? 0.1 : 1.0;
        const auto d = oracle::from_rows(rows);
        const auto a = assignment_from_labels({0, 0, 0, 1, 1, 1});
        CHECK(silhouette_score(d, a) == doctest::Approx(0.9).epsilon(1e-15));
        for (double s : silhouette_samples(d, a)) CHECK(s == doctest::Approx(0.9).epsilon(1e-15));

        CHECK(silhouette_score(d, assignment_from_labels({0, 1, 2, 3, 4, 5})) == 0.0);
        CHECK(silhouette_score(d, assignment_from_labels({0, 0, 0, 0, 0, 0})) == kSingleClusterSilhouette);
    }

    TEST_CASE("silhouette matches the double-loop oracle")
    {
        std::mt19937_64 gen(23);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 2 + trial % 9;
            const auto rows = oracle::random_matrix(gen, n, false);
            std::vector<int> labels(n);
            for (auto& l : labels) l = static_cast<int>(gen() % 3);
            const auto got = silhouette_score(oracle::from_rows(rows), assignment_from_labels(labels));
            CHECK(std::abs(got - oracle::silhouette(rows, labels)) <= 1e-12);
        }
    }

    TEST_CASE("assignment helpers")
    {
        const auto a = assignment_from_labels({5, 2, 5, 9});
        CHECK(a.labels == std::vector<int>{0, 1, 0, 2});
        CHECK(a.num_clusters == 3);
        const auto res = agglomerate(four_points(), Linkage::single, StopAtThreshold{0.5});
        CHECK(assignment_from_json(assignment_to_json(res, Linkage::single, StopAtThreshold{0.5})) == res);
        CHECK(parse_linkage(to_string(Linkage::complete)) == Linkage::complete);
    }
}
