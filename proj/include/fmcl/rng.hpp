#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace fmcl {

/// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit
/// counter under a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept;

/// Derives a 64-bit stream key from (master seed, domain label, indices).
/// FNV-1a over the label, SplitMix64 finalisation between every component.
std::uint64_t derive_key(std::uint64_t master_seed, std::string_view domain,
                         std::initializer_list<std::uint64_t> indices) noexcept;

/// Counter-based random stream. The key fixes the stream; the counter walks
/// it. Identical keys give identical sequences, independent of which thread
/// consumes them or of how many other streams exist.
class SeededStream {
public:
    explicit SeededStream(std::uint64_t key) noexcept;
    SeededStream(std::uint64_t master_seed, std::string_view domain,
                 std::initializer_list<std::uint64_t> indices = {}) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on (0, 1).
    double uniform_open() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Unbiased integer on [0, bound) by rejection. bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Standard normal via Box-Muller; consumes two uniforms per draw.
    double normal() noexcept;
    /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the U^(1/shape) boost.
    double gamma(double shape) noexcept;
    /// Dirichlet(concentration * 1_n) by normalised gammas.
    std::vector<double> dirichlet(std::size_t n, double concentration) noexcept;

    template <typename T>
    void shuffle(std::vector<T>& items) noexcept
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    void refill() noexcept;

    std::uint64_t key_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned used_ = 4;
};

}  // namespace fmcl
