#pragma once

#include <cstdint>
#include <random>

#include "uex/common.hpp"

namespace uex {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Reproducible stream: identical (seed, stream) gives an identical draw
// sequence. Distributions are sampled from hand-rolled transforms of the
// engine's raw 64-bit output, so the sequence does not depend on the
// standard library's unspecified distribution internals.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {
        std::uint64_t s = seed ^ (0x853c49e6748fea9bULL * (stream + 1));
        detail::splitmix64(s);
        engine_.seed(detail::splitmix64(s));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Box-Muller; two uniforms consumed per draw.
    double normal(double mean = 0.0, double sigma = 1.0) {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
    }

    // Uniform direction on S^{d-1}.
    Direction direction(std::size_t dim) {
        Point v(dim);
        double n2 = 0.0;
        do {
            for (std::size_t i = 0; i < dim; ++i) v[i] = normal();
            n2 = norm2(v);
        } while (n2 == 0.0);
        return Direction(v);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

}  // namespace uex
