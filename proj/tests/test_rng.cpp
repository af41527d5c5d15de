#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "fmcl/rng.hpp"

using namespace fmcl;

TEST_SUITE("rng")
{
    TEST_CASE("Philox4x32-10 known-answer vectors")
    {
        using Block = std::array<std::uint32_t, 4>;
        CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
        CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
              Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
        CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
              Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    }

    TEST_CASE("streams are reproducible and keyed")
    {
        SeededStream a(42, "x", {1, 2});
        SeededStream b(42, "x", {1, 2});
        SeededStream c(42, "x", {2, 1});
        SeededStream d(42, "y", {1, 2});
        std::vector<std::uint64_t> va, vb, vc, vd;
        for (int i = 0; i < 16; ++i) {
            va.push_back(a.next_u64());
            vb.push_back(b.next_u64());
            vc.push_back(c.next_u64());
            vd.push_back(d.next_u64());
        }
        CHECK(va == vb);
        CHECK(va != vc);
        CHECK(va != vd);
        CHECK(derive_key(1, "a", {}) != derive_key(2, "a", {}));
    }

    TEST_CASE("uniform, below and normal moments")
    {
        SeededStream s(7, "moments");
        const int n = 200000;
        double sum = 0, sq = 0;
        std::vector<int> bins(7, 0);
        for (int i = 0; i < n; ++i) {
            const double u = s.uniform();
            CHECK_UNARY(u >= 0.0);
            CHECK_UNARY(u < 1.0);
            bins[s.below(7)]++;
            const double z = s.normal();
            sum += z;
            sq += z * z;
        }
        CHECK(std::abs(sum / n) < 0.01);
        CHECK(std::abs(sq / n - 1.0) < 0.02);
        for (int b : bins) CHECK(std::abs(b / double(n) - 1.0 / 7) < 0.005);
    }

    TEST_CASE("gamma and dirichlet")
    {
        SeededStream s(3, "gamma");
        for (double shape : {0.1, 0.5, 1.0, 4.0}) {
            const int n = 100000;
            double mean = 0;
            for (int i = 0; i < n; ++i) {
                const double g = s.gamma(shape);
                CHECK_UNARY(g >= 0.0);
                mean += g;
            }
            CHECK(mean / n == doctest::Approx(shape).epsilon(0.03));
        }
        for (int i = 0; i < 100; ++i) {
            const auto p = s.dirichlet(20, 0.1);
            CHECK(p.size() == 20);
            CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::all_of(p.begin(), p.end(), [](double x) { return std::isfinite(x) && x >= 0; }));
        }
    }

    TEST_CASE("shuffle is a permutation")
    {
        SeededStream s(5, "shuffle");
        std::vector<int> v(50);
        std::iota(v.begin(), v.end(), 0);
        auto w = v;
        s.shuffle(w);
        CHECK(w != v);
        std::sort(w.begin(), w.end());
        CHECK(w == v);
    }
}
