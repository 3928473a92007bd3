#pragma once

#include <cmath>
#include <cstdint>

namespace exflow {

// Counter-based generator: output depends only on (seed, counter), so trial
// loops can run in any order (or in parallel) and still reproduce bitwise.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t counter) const {
        // splitmix64 finalizer applied to an affine walk of the counter
        std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform01(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

// Sequential view on a dedicated sub-stream of a CounterRng. Each trial of a
// randomized verifier gets its own stream index, which decouples the draws of
// one trial from how many draws its neighbours consumed.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : rng_(seed), counter_(stream << 20) {}

    double uniform01() { return rng_.uniform01(counter_++); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // log-uniform on [lo, hi], lo > 0
    double log_uniform(double lo, double hi) {
        return lo * std::exp(uniform01() * std::log(hi / lo));
    }

    double normal() {
        // Box-Muller; one value per call keeps the stream layout simple
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::uint64_t uniform_index(std::uint64_t n) {
        return rng_.bits(counter_++) % n;
    }

private:
    CounterRng rng_;
    std::uint64_t counter_;
};

} // namespace exflow
