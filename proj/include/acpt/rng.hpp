// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "acpt/hash.hpp"

namespace acpt {

// splitmix64 output mixing.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Counter-based generator: the i-th draw is a pure function of (key, i), so
// consumers can be evaluated in any order or in parallel and still reproduce
// the exact same stream. Keys are derived from (seed, stream ids) via FNV.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
        std::uint64_t h = 14695981039346656037ull;
        h = fnv1a64_u64(seed, h);
        h = fnv1a64_u64(a, h);
        h = fnv1a64_u64(b, h);
        h = fnv1a64_u64(c, h);
        return h;
    }

    std::uint64_t next_u64() { return mix64(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_double_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : next_u64() % n; }

    bool bernoulli(double p) { return next_double() < p; }

    // Box-Muller transform; draws two uniforms per normal deviate.
    double gaussian(double mean = 0.0, double stddev = 1.0) {
        const double u1 = next_double_open();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::array<double, 3> gaussian3(double stddev) {
        return {gaussian(0.0, stddev), gaussian(0.0, stddev), gaussian(0.0, stddev)};
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Deterministic Fisher-Yates; std::shuffle is implementation-defined and is
// avoided everywhere reproducibility matters.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, CounterRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

} // namespace acpt
