#pragma once

#include <cstdint>

namespace predckpt
{

/// SplitMix64 finalizer. Used for seeding and for deriving child stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of child stream `index` of `parent`. Stable across platforms and releases.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// xoshiro256** 1.0, seeded through SplitMix64.
///
/// The standard <random> distributions are not reproducible across library
/// implementations, so uniform() is implemented here from raw bits. Any change
/// to the output sequence must bump kVersion.
class Rng
{
public:
    static constexpr int kVersion = 1;

    explicit Rng(std::uint64_t seed) noexcept : seed_(seed)
    {
        std::uint64_t s = seed;
        for (auto& w : state_)
        {
            s += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = s;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            w = z ^ (z >> 31);
        }
    }

    std::uint64_t next() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as the argument of a logarithm.
    double uniform_open0() noexcept { return 1.0 - uniform(); }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Independent generator for child stream `index`.
    Rng split(std::uint64_t index) const noexcept { return Rng(derive_seed(seed_, index)); }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t state_[4]{};
};

} // namespace predckpt
