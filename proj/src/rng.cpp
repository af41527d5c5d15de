#include "fmcl/rng.hpp"

#include <cmath>
#include <numbers>

namespace fmcl {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t derive_key(std::uint64_t master_seed, std::string_view domain,
                         std::initializer_list<std::uint64_t> indices) noexcept
{
    std::uint64_t label_hash = 0xCBF29CE484222325ULL;
    for (unsigned char ch : domain) {
        label_hash ^= ch;
        label_hash *= 0x100000001B3ULL;
    }
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ label_hash);
    for (std::uint64_t idx : indices) h = splitmix64(h ^ splitmix64(idx + 0x632BE59BD9B4E019ULL));
    return h;
}

SeededStream::SeededStream(std::uint64_t key) noexcept : key_(key) {}

SeededStream::SeededStream(std::uint64_t master_seed, std::string_view domain,
                           std::initializer_list<std::uint64_t> indices) noexcept
    : key_(derive_key(master_seed, domain, indices))
{
}

void SeededStream::refill() noexcept
{
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_),
                                            static_cast<std::uint32_t>(block_ >> 32), 0u, 0u};
    const std::array<std::uint32_t, 2> k{static_cast<std::uint32_t>(key_),
                                         static_cast<std::uint32_t>(key_ >> 32)};
    buffer_ = philox4x32_10(ctr, k);
    ++block_;
    used_ = 0;
}

std::uint32_t SeededStream::next_u32() noexcept
{
    if (used_ == 4) refill();
    return buffer_[used_++];
}

std::uint64_t SeededStream::next_u64() noexcept
{
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double SeededStream::uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededStream::uniform_open() noexcept
{
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

std::uint64_t SeededStream::below(std::uint64_t bound) noexcept
{
    // Reject the biased tail of the 64-bit range.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
}

double SeededStream::normal() noexcept
{
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SeededStream::gamma(double shape) noexcept
{
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::vector<double> SeededStream::dirichlet(std::size_t n, double concentration) noexcept
{
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& x : p) {
        x = gamma(concentration);
        total += x;
    }
    if (total > 0.0) {
        for (auto& x : p) x /= total;
    } else {
        // Every gamma underflowed (tiny concentration): the limit is a point mass.
        p.assign(n, 0.0);
        p[static_cast<std::size_t>(below(n))] = 1.0;
    }
    return p;
}

}  // namespace fmcl
