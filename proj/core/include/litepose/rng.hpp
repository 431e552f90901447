// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace litepose {

/// Splittable counter-based RNG (splitmix64 core). All randomness in the
/// toolkit flows through this so results are reproducible bit-for-bit
/// across platforms and standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Derive an independent stream; does not advance this generator.
    Rng split(uint64_t stream) const {
        Rng mix(state_ ^ (0x2545f4914f6cdd1dULL * (stream + 1)));
        mix.next();
        return Rng(mix.next());
    }

    /// Uniform integer in [0, bound), unbiased (rejection sampling).
    uint64_t below(uint64_t bound) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v = next();
        while (v >= limit) v = next();
        return v % bound;
    }

    /// Uniform double in [0, 1) with 53 bits of entropy.
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    /// Uniform float in [lo, hi).
    float uniform(float lo, float hi) { return lo + float(uniform()) * (hi - lo); }

private:
    uint64_t state_;
};

}  // namespace litepose
