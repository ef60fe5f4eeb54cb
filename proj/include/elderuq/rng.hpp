#pragma once

#include <cstdint>

namespace elderuq {

/// Counter-based generator: the k-th draw is a pure function of (seed, k), so
/// sampling is reproducible bit-for-bit and trivially parallel. SplitMix64
/// finalizer over a Weyl sequence.
class CounterRng {
  public:
    explicit CounterRng(uint64_t seed) : seed_(seed) {}

    uint64_t bits(uint64_t counter) const {
        uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0,1) with 53-bit resolution.
    double uniform01(uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [-1,1).
    double uniform_sym(uint64_t counter) const { return 2.0 * uniform01(counter) - 1.0; }

  private:
    uint64_t seed_;
};

} // namespace elderuq
