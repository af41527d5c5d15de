#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "fmcl/signature.hpp"

using namespace fmcl;

TEST_SUITE("signature")
{
    TEST_CASE("class prototypes and weights by hand")
    {
        EmbeddingDataset ds(2, 2);
        ds.add(std::vector<double>{1, 2}, 0);
        ds.add(std::vector<double>{3, 4}, 0);
        ds.add(std::vector<double>{5, 6}, 1);
        const auto sig = build_signature(ds, 4);
        CHECK(sig.client_id == 4);
        CHECK(sig.total_samples == 3);
        REQUIRE(sig.entries.size() == 2);
        CHECK(sig.entries.at(0).mu == std::vector<double>{2, 3});
        CHECK(sig.entries.at(0).weight == doctest::Approx(2.0 / 3).epsilon(1e-15));
        CHECK(sig.entries.at(1).mu == std::vector<double>{5, 6});
        CHECK(sig.entries.at(1).weight == doctest::Approx(1.0 / 3).epsilon(1e-15));
    }

    TEST_CASE("single class and constant input")
    {
        EmbeddingDataset ds(3, 4);
        for (int i = 0; i < 5; ++i) ds.add(std::vector<double>{0.25, -1.5, 8.0}, 2);
        const auto sig = build_signature(ds, 0);
        REQUIRE(sig.entries.size() == 1);
        CHECK(sig.entries.at(2).weight == 1.0);
        CHECK(sig.entries.at(2).mu == std::vector<double>{0.25, -1.5, 8.0});

        const auto pooled = build_global_mean_signature(ds, 0);
        CHECK(pooled.entries.at(kPooledClass).mu == sig.entries.at(2).mu);
        CHECK(pooled.entries.at(kPooledClass).weight == 1.0);
    }

    TEST_CASE("global mean ignores labels")
    {
        EmbeddingDataset ds(2, 3);
        ds.add(std::vector<double>{0, 0}, 0);
        ds.add(std::vector<double>{2, 2}, 2);
        const auto sig = build_signature(ds, 1, SignatureMode::global_mean);
        REQUIRE(sig.entries.size() == 1);
        CHECK(sig.entries.at(kPooledClass).mu == std::vector<double>{1, 1});
        CHECK(sig.entries.at(kPooledClass).weight == 1.0);
    }

    TEST_CASE("prototype matches a brute-force component mean")
    {
        std::mt19937_64 gen(5);
        std::normal_distribution<double> normal(3.0, 10.0);
        EmbeddingDataset ds(8, 1);
        std::vector<long double> total(8, 0.0L);
        for (int i = 0; i < 100; ++i) {
            std::vector<double> v(8);
            for (std::size_t d = 0; d < 8; ++d) {
                v[d] = normal(gen);
                total[d] += v[d];
            }
            ds.add(v, 0);
        }
        const auto sig = build_global_mean_signature(ds, 0);
        for (std::size_t d = 0; d < 8; ++d) {
            CHECK(std::abs(sig.entries.at(kPooledClass).mu[d] - static_cast<double>(total[d] / 100.0L)) < 1e-12);
        }
    }

    TEST_CASE("empty shard is an error and JSON round-trips")
    {
        EmbeddingDataset empty(2, 2);
        CHECK_THROWS_AS(build_signature(empty, 0), std::invalid_argument);
        CHECK_THROWS_AS(build_global_mean_signature(empty, 0), std::invalid_argument);

        EmbeddingDataset ds(2, 3);
        ds.add(std::vector<double>{0.1, 0.2}, 0);
        ds.add(std::vector<double>{1.0 / 3, 7}, 2);
        const std::vector<ClientSignature> sigs{build_signature(ds, 0), build_global_mean_signature(ds, 1)};
        CHECK(signatures_from_json(signatures_to_json(sigs)) == sigs);
    }
}
