#pragma once

#include <cstdint>
#include <vector>

namespace facegen {

// xoshiro256++ seeded through splitmix64. Every draw is pinned by this file,
// independent of the standard library, so identical seeds give identical
// streams on every build.
class Rng {
public:
    explicit Rng(uint64_t seed) { reseed(seed); }

    void reseed(uint64_t seed);

    uint64_t next_u64();

    // [0, 1) with 53 random bits.
    double next_unit();

    // Uniform over [0, n), rejection-sampled so every value is equally likely.
    uint64_t next_below(uint64_t n);

    int next_int(int lo, int hi_inclusive);

    bool next_coin(double p) { return next_unit() < p; }

    // Standard normal via Box-Muller with a cached spare.
    double next_normal();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derives an independent stream from (seed, tags...). Used for stateless
    // per-item randomness: derived generators never share state.
    static Rng derive(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0);

private:
    uint64_t state_[4] = {};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

uint64_t splitmix64(uint64_t& x);

} // namespace facegen
