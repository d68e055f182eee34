#pragma once

#include <cstdint>
#include <limits>

namespace bpvei {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** engine. Satisfies UniformRandomBitGenerator so it plugs into
/// the <random> distributions.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
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

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
};

/// Independent stream for one (seed, replication, lane) triple. Streams depend
/// only on the key, never on the order in which they are created, so work can
/// be spread over any number of threads without changing results.
inline Xoshiro256 make_stream(std::uint64_t seed, std::uint64_t replication, std::uint64_t lane = 0) noexcept {
    std::uint64_t mix = seed;
    std::uint64_t key = splitmix64(mix);
    mix = key ^ (replication * 0xd1b54a32d192ed03ULL);
    key = splitmix64(mix);
    mix = key ^ (lane * 0x8cb92ba72f3d8dd7ULL);
    return Xoshiro256(splitmix64(mix));
}

}  // namespace bpvei
