#include "facegen/rng.hpp"

#include <cmath>

namespace facegen {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

void Rng::reseed(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& s : state_) {
        s = splitmix64(sm);
    }
    has_spare_ = false;
    spare_ = 0.0;
}

static inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

uint64_t Rng::next_u64() {
    uint64_t* s = state_;
    const uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::next_below(uint64_t n) {
    if (n <= 1) {
        return 0;
    }
    const uint64_t mask = ~0ull >> __builtin_clzll(n - 1 | 1);
    uint64_t r = next_u64() & mask;
    while (r >= n) {
        r = next_u64() & mask;
    }
    return r;
}

int Rng::next_int(int lo, int hi_inclusive) {
    return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi_inclusive - lo + 1)));
}

double Rng::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double two_pi = 6.283185307179586;
    double u1 = 1.0 - next_unit(); // avoid log(0)
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(two_pi * u2);
    has_spare_ = true;
    return r * std::cos(two_pi * u2);
}

Rng Rng::derive(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t sm = seed;
    uint64_t h = splitmix64(sm);
    sm ^= a * 0xA24BAED4963EE407ull;
    h ^= splitmix64(sm);
    sm ^= b * 0x9FB21C651E98DF25ull;
    h ^= splitmix64(sm);
    sm ^= c * 0xD6E8FEB86659FD93ull;
    h ^= splitmix64(sm);
    return Rng(h);
}

} // namespace facegen
