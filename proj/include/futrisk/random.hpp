// random.hpp
// Counter-based random streams keyed on (master seed, coordinates).
//
// Every stream is a pure function of its key: the i-th draw is
// mix(key + i * golden_gamma), the SplitMix64 finalizer applied to a counter.
// Streams for independent work units are obtained by hashing the unit's
// coordinates into the key, so no state is ever shared between workers and
// results do not depend on scheduling.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace futrisk {

inline constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive a stream key from a master seed and an ordered list of coordinates.
inline constexpr std::uint64_t derive_key(std::uint64_t master_seed,
                                          std::initializer_list<std::uint64_t> coords) noexcept
{
    std::uint64_t key = splitmix_finalize(master_seed ^ 0x6A09E667F3BCC908ULL);
    for (std::uint64_t c : coords)
        key = splitmix_finalize(key ^ splitmix_finalize(c + 0x9E3779B97F4A7C15ULL));
    return key;
}

/// UniformRandomBitGenerator over a counter. Copyable; copies replay the same draws.
class CounterStream {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterStream(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        ++counter_;
        return splitmix_finalize(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        __extension__ using u128 = unsigned __int128;
        u128 m = static_cast<u128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<u128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace futrisk
