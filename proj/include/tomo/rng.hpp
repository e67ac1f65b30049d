#pragma once

#include <cstdint>
#include <random>

namespace tomo::rng {

// Every randomized routine in this library draws from std::mt19937_64 and
// maps raw engine output to doubles itself, so the value stream is identical
// on any conforming standard library. The identifier below is recorded in
// experiment output so results can be replicated elsewhere.
inline constexpr const char* kRngId = "mt19937_64";

using Engine = std::mt19937_64;

// splitmix64 finalizer, used only to spread seeds for derived streams.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derived stream seed: mix(base, a, b) = sm(sm(sm(base) ^ a) ^ b).
// Harness and deviation-curve code document which indices go in a and b.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(base) ^ a) ^ b);
}

// Uniform in [0,1) from the top 53 bits of one engine step.
inline double uniform01(Engine& e) {
    return static_cast<double>(e() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& e, double lo, double hi) {
    return lo + (hi - lo) * uniform01(e);
}

inline bool bernoulli(Engine& e, double p) {
    return uniform01(e) < p;
}

// Index in [0, n). Bias from the float mapping is far below anything the
// generators here are sensitive to.
inline std::size_t uniform_index(Engine& e, std::size_t n) {
    auto k = static_cast<std::size_t>(uniform01(e) * static_cast<double>(n));
    return k < n ? k : n - 1;
}

}  // namespace tomo::rng
