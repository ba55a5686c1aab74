#pragma once

#include <cstdint>
#include <vector>

namespace rsplearn {

/// splitmix64 finalizer. Used both inside SplitMix64 and as the counter hash
/// for deriving per-trial seeds; the exact formula is part of the file-format
/// contract (see README), so it must never change.
inline std::uint64_t splitmixMix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic, portable RNG (splitmix64). std::mt19937 plus stdlib
/// distributions are not bit-stable across standard libraries, which would
/// break the byte-identical-output contract, so sampling is done by hand.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double nextDouble() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Lemire's method with rejection, exact.
    std::uint64_t nextBounded(std::uint64_t bound) {
        if (bound == 0) return 0;
        while (true) {
            std::uint64_t x = next();
            __uint128_t m = static_cast<__uint128_t>(x) * bound;
            auto lo = static_cast<std::uint64_t>(m);
            if (lo >= bound) return static_cast<std::uint64_t>(m >> 64);
            std::uint64_t threshold = (-bound) % bound;
            if (lo >= threshold) return static_cast<std::uint64_t>(m >> 64);
        }
    }

  private:
    std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle driven by a SplitMix64 stream.
template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.nextBounded(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace rsplearn
