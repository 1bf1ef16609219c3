#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace bbo {

/// Random stream used by every algorithm in the library.
///
/// The generator family is fixed: xoshiro256** seeded by four successive
/// SplitMix64 outputs of the 64-bit seed. Uniform reals take the top 53 bits,
/// normals use the Marsaglia polar method, bounded integers use rejection on
/// the top bits. None of this depends on the standard library's
/// implementation-defined distributions, so a given seed yields the same draw
/// sequence on every platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1).
    double uniform() noexcept;
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept;
    /// Standard normal.
    double normal() noexcept;
    /// Uniform on {0, ..., n - 1}; n must be positive.
    std::size_t uniform_index(std::size_t n) noexcept;

    /// Independent child stream; depends only on this stream's seed and `index`,
    /// not on how many draws have been taken.
    [[nodiscard]] RngStream split(std::uint64_t index) const noexcept;

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer applied to `state + 0x9E3779B97F4A7C15`; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seed of run `index` under `master`:
/// splitmix64 applied to (master XOR 0xD1B54A32D192ED03 * (index + 1)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

} // namespace bbo
