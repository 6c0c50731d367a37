#pragma once
#include <cstdint>
#include <random>

namespace circlelab {

// Deterministic generator wrapper. Uniforms are produced from raw engine
// words (not std::uniform_real_distribution, whose output is
// implementation-defined), so seeded runs are byte-stable across toolchains.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(std::uint64_t seed) : eng(seed) {}

    double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t integer(std::uint64_t n) { return eng() % n; }

    // Independent substream for worker k of a seeded task.
    Rng spawn(std::uint64_t k) const {
        std::mt19937_64 copy = eng;
        std::uint64_t base = copy();
        return Rng(base ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
    }
};

} // namespace circlelab
