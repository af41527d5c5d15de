#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fmcl/distance.hpp"
#include "oracles.hpp"

using namespace fmcl;

namespace {

ClientSignature make(std::initializer_list<std::pair<int, ClassPrototype>> entries)
{
    ClientSignature s;
    for (const auto& [c, p] : entries) {
        s.entries[c] = p;
        s.dim = p.mu.size();
    }
    return s;
}

}  // namespace

TEST_SUITE("distance")
{
    TEST_CASE("full overlap with swapped orthogonal prototypes")
    {
        const auto a = make({{0, {{1, 0}, 0.5, 1}}, {1, {{0, 1}, 0.5, 1}}});
        const auto b = make({{0, {{0, 1}, 0.5, 1}}, {1, {{1, 0}, 0.5, 1}}});
        const auto t = pair_terms(a, b, DistanceParams{});
        REQUIRE(t);
        CHECK(t->overlap == 1.0);
        CHECK(t->multiplier == 1.0);
        CHECK(t->distance == doctest::Approx(1.0 / 1.001).epsilon(1e-15));
        CHECK(std::abs(t->distance - 0.9990) < 1e-4);
    }

    TEST_CASE("low overlap is penalised")
    {
        const auto a = make({{0, {{1, 0}, 0.1, 1}}, {1, {{1, 1}, 0.9, 1}}});
        const auto b = make({{0, {{0, 1}, 0.1, 1}}, {2, {{1, 1}, 0.9, 1}}});
        const auto t = pair_terms(a, b, DistanceParams{});
        REQUIRE(t);
        CHECK(t->overlap == doctest::Approx(0.1));
        CHECK(t->capped == doctest::Approx(0.1 / 0.101).epsilon(1e-14));
        CHECK(t->multiplier == doctest::Approx(10.0).epsilon(1e-14));
        CHECK(std::abs(t->distance - 9.901) < 1e-3);

        DistanceParams plain;
        plain.overlap_scaling = false;
        CHECK(pair_terms(a, b, plain)->distance == doctest::Approx(0.1 / 0.101).epsilon(1e-14));

        // The multiplier saturates at beta.
        DistanceParams capped;
        capped.beta = 5;
        CHECK(pair_terms(a, b, capped)->multiplier == 5.0);
    }

    TEST_CASE("identical and disjoint signatures")
    {
        const auto a = make({{0, {{0.6, 0.8}, 1.0, 1}}});
        const auto t = pair_terms(a, a, DistanceParams{});
        REQUIRE(t);
        CHECK(t->distance <= 1e-3);
        CHECK(t->distance >= 0.0);

        const auto b = make({{1, {{0.6, 0.8}, 1.0, 1}}});
        CHECK_FALSE(pair_terms(a, b, DistanceParams{}).has_value());

        const auto build = build_distance_matrix({a, b}, DistanceParams{});
        CHECK(build.d_big == 200.0);
        CHECK(build.matrix(0, 1) == 200.0);
        CHECK(build.matrix(1, 0) == 200.0);
        CHECK_FALSE(build.p95.has_value());
        CHECK(build.disjoint_pairs == 1);
    }

    TEST_CASE("identical clients give a near-zero matrix with zero diagonal")
    {
        const auto a = make({{0, {{1, 2, 3}, 0.3, 1}}, {4, {{-1, 0, 2}, 0.7, 1}}});
        const auto build = build_distance_matrix({a, a, a, a}, DistanceParams{});
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(build.matrix(i, i) == 0.0);
            for (std::size_t j = 0; j < 4; ++j) CHECK(build.matrix(i, j) < 1e-3);
        }
    }

    TEST_CASE("matrix matches the scalar oracle, including D_big")
    {
        std::mt19937_64 gen(2024);
        for (int trial = 0; trial < 10; ++trial) {
            const auto sigs = oracle::random_signatures(gen, 10, 4, 6);
            for (bool scaling : {true, false}) {
                DistanceParams params;
                params.overlap_scaling = scaling;
                const auto build = build_distance_matrix(sigs, params, trial % 3 + 1);
                const auto ref = oracle::distance_matrix(sigs, params.alpha, params.beta, params.epsilon, scaling);
                CHECK(std::abs(build.d_big - ref.d_big) <= 1e-12);
                for (std::size_t i = 0; i < sigs.size(); ++i)
                    for (std::size_t j = 0; j < sigs.size(); ++j)
                        CHECK(std::abs(build.matrix(i, j) - ref.d[i][j]) <= 1e-12);
            }
        }
    }

    TEST_CASE("thread count does not change the matrix")
    {
        std::mt19937_64 gen(77);
        const auto sigs = oracle::random_signatures(gen, 12, 5, 4);
        const auto one = build_distance_matrix(sigs, DistanceParams{}, 1);
        const auto many = build_distance_matrix(sigs, DistanceParams{}, 5);
        CHECK(one.matrix == many.matrix);
        CHECK(one.d_big == many.d_big);
    }

    TEST_CASE("serialisation and validation")
    {
        std::mt19937_64 gen(3);
        const auto sigs = oracle::random_signatures(gen, 6, 3, 3);
        const auto build = build_distance_matrix(sigs, DistanceParams{});
        CHECK(matrix_from_csv(matrix_to_csv(build.matrix)) == build.matrix);
        CHECK(matrix_from_json(distance_build_to_json(build, DistanceParams{})) == build.matrix);

        CHECK_THROWS(DistanceMatrix(2, {0, 1, 2, 0}));
        CHECK_THROWS(DistanceMatrix(2, {1, 1, 1, 0}));
        CHECK_THROWS(DistanceMatrix(2, {0, -1, -1, 0}));
        DistanceParams bad;
        bad.epsilon = 0;
        CHECK_THROWS(bad.validate());
    }
}
